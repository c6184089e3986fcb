#pragma once

#include "neva/network.hpp"
#include "neva/valuation.hpp"
#include "neva/solver.hpp"
#include "neva/analysis.hpp"
#include "neva/io.hpp"
#include "neva/cli.hpp"
