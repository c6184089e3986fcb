#pragma once

// Command-line front end. Kept header-only so tests can drive it in-process.
//
//   neva <solve|stress|limit-maturity|limit-beta|curve|mc-global>
//        --network PATH --scenario PATH [--output PATH] [--format csv|json]
//        [--epsilon X] [--max-iter N] [--seed S] [--threads T]
//
// Exit status: 0 success, 1 completed but some solve did not converge (or
// the Monte Carlo run dropped too many samples), 2 input error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "neva/analysis.hpp"
#include "neva/io.hpp"
#include "neva/log.hpp"
#include "neva/solver.hpp"

namespace neva {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUnconverged = 1;
inline constexpr int kExitInputError = 2;

struct CommandOptions {
  std::string command;
  std::string network_path;
  std::string scenario_path;
  std::string output_path;
  Format format = Format::json;
  std::optional<double> epsilon;
  std::optional<std::size_t> max_iterations;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

namespace detail {

inline ScenarioKind scenario_for(const std::string& command) {
  static const std::map<std::string, ScenarioKind> table = {
      {"solve", ScenarioKind::solve},           {"stress", ScenarioKind::stress},
      {"limit-maturity", ScenarioKind::limit_maturity}, {"limit-beta", ScenarioKind::limit_beta},
      {"curve", ScenarioKind::curve},           {"mc-global", ScenarioKind::mc_global}};
  return table.at(command);
}

// Writes next to the target and renames, so a failed run never leaves a
// truncated file behind.
inline void write_atomically(const std::string& path, const std::string& data) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError(path + ": cannot open for writing");
    f << data;
    f.flush();
    if (!f) {
      f.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw InputError(path + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InputError(path + ": cannot replace file");
  }
}

struct CommandOutput {
  std::string text;
  bool complete = true;
};

inline CommandOutput execute(const CommandOptions& opt) {
  const ScenarioKind wanted = scenario_for(opt.command);
  std::optional<FinancialNetwork> net;
  if (!opt.network_path.empty()) net = load_network(opt.network_path);
  else if (wanted != ScenarioKind::curve) throw InputError("--network is required for " + opt.command);

  const std::size_t banks = net ? net->size() : 0;
  Scenario sc = load_scenario(opt.scenario_path, banks);
  if (sc.kind != wanted)
    throw InputError(opt.scenario_path + ": scenario block is '" + scenario_key(sc.kind) + "' but the command is '" +
                     opt.command + "'");
  if (opt.epsilon) sc.solver.epsilon = opt.epsilon;
  if (opt.max_iterations) sc.solver.max_iterations = *opt.max_iterations;
  if (opt.seed) sc.seed = *opt.seed;
  try {
    sc.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  log::info("running " + opt.command + " with " + sc.valuation.describe());

  CommandOutput out;
  switch (sc.kind) {
    case ScenarioKind::solve: {
      const SolveReport r = solve(*net, sc.valuation, sc.solver);
      if (!r.converged)
        log::warn("solve stopped after " + std::to_string(r.iterations) + " iterations without converging");
      if (r.continuity_warning) log::warn("least solution requested for a family not continuous from below");
      out.complete = r.converged;
      out.text = serialize_solve(*net, r, opt.format);
      break;
    }
    case ScenarioKind::stress: {
      const auto results = stress_test(*net, sc.valuation, std::span<const double>(sc.alpha_grid), sc.solver);
      for (const StressResult& r : results)
        if (!r.converged) {
          log::warn("stress point alpha=" + format_double(r.alpha) + " did not converge");
          out.complete = false;
        }
      std::optional<std::vector<DiscountComparison>> discounts;
      if (is_exante(sc.valuation.interbank_kind))
        discounts = merton_vs_network_discount(*net, sc.valuation, sc.alpha_grid, sc.solver);
      out.text = serialize_stress(*net, results, opt.format, discounts ? &*discounts : nullptr);
      break;
    }
    case ScenarioKind::limit_maturity: {
      const LimitSeries s = maturity_limit_experiment(*net, sc.sigma, sc.tau_sequence, sc.beta, sc.solver);
      out.complete = !s.partial;
      out.text = serialize_limit(*net, s, opt.format, "limit-maturity");
      break;
    }
    case ScenarioKind::limit_beta: {
      const LimitSeries s = debtrank_limit_experiment(*net, sc.beta_sequence, sc.solver);
      for (std::size_t j : s.flagged_banks)
        log::info("bank " + net->bank_id(j) + " has nonpositive book equity; valued at zero by convention");
      out.complete = !s.partial;
      out.text = serialize_limit(*net, s, opt.format, "limit-beta");
      break;
    }
    case ScenarioKind::curve:
      out.text = serialize_curves(evaluate_curves(sc.curves, sc.equity_grid), opt.format);
      break;
    case ScenarioKind::mc_global: {
      const MonteCarloResult r = monte_carlo_global_valuation(*net, sc.sigma, sc.tau, sc.beta, sc.samples, sc.seed,
                                                              sc.solver, opt.threads);
      if (!r.valid) log::warn(std::to_string(r.dropped) + " of " + std::to_string(r.samples) + " samples dropped");
      out.complete = r.valid;
      out.text = serialize_monte_carlo(*net, r, sc.seed, opt.format);
      break;
    }
  }
  if (!out.complete) log::warn("results are incomplete; exit status 1");
  return out;
}

}  // namespace detail

/// Runs one CLI invocation. `args` excludes the program name.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Network valuation of interbank claims", "neva"};
  app.require_subcommand(1);
  CommandOptions opt;
  std::string format = "json";
  double epsilon = 0.0;
  std::size_t max_iter = 0;
  std::uint64_t seed = 0;

  for (const char* name : {"solve", "stress", "limit-maturity", "limit-beta", "curve", "mc-global"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--network", opt.network_path, "network JSON file");
    sub->add_option("--scenario", opt.scenario_path, "scenario JSON file")->required();
    sub->add_option("--output", opt.output_path, "write results here instead of standard output");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--epsilon", epsilon, "solver step tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", max_iter, "iteration cap per solve")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Monte Carlo seed (default 0)");
    sub->add_option("--threads", opt.threads, "Monte Carlo worker threads")->check(CLI::PositiveNumber);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    app.exit(e, out, err);
    return kExitInputError;
  }

  CLI::App* sub = app.get_subcommands().front();
  opt.command = sub->get_name();
  opt.format = format == "csv" ? Format::csv : Format::json;
  if (sub->count("--epsilon")) opt.epsilon = epsilon;
  if (sub->count("--max-iter")) opt.max_iterations = max_iter;
  if (sub->count("--seed")) opt.seed = seed;

  try {
    const detail::CommandOutput result = detail::execute(opt);
    if (opt.output_path.empty()) out << result.text;
    else detail::write_atomically(opt.output_path, result.text);
    return result.complete ? kExitOk : kExitUnconverged;
  } catch (const InputError& e) {
    err << "neva: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "neva: invalid input: " << e.what() << '\n';
  } catch (const std::domain_error& e) {
    err << "neva: invalid input: " << e.what() << '\n';
  }
  return kExitInputError;
}

}  // namespace neva
