#pragma once

// Picard iteration of the equity map on the lattice [m, M].
//
// Starting from face values the iterates decrease monotonically to the
// greatest fixed point; starting from the lower bounds they increase to the
// least one when every valuation is continuous from below.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "neva/network.hpp"
#include "neva/valuation.hpp"

namespace neva {

enum class StartKind { face_values, lower_bounds, custom };
enum class SolutionKind { greatest, least, custom };

inline const char* to_string(SolutionKind k) noexcept {
  switch (k) {
    case SolutionKind::greatest: return "greatest";
    case SolutionKind::least: return "least";
    case SolutionKind::custom: return "custom";
  }
  return "?";
}

inline constexpr double kMonotoneSlack = 1e-12;
inline constexpr std::size_t kDefaultMaxIterations = 100000;

struct SolveConfig {
  /// Sup-norm step tolerance; defaults to 1e-10 * max(1, |M|_inf).
  std::optional<double> epsilon;
  std::size_t max_iterations = kDefaultMaxIterations;
  StartKind start = StartKind::face_values;
  EquityVector custom_start;

  double effective_epsilon(const FinancialNetwork& net) const {
    if (epsilon) return *epsilon;
    return 1e-10 * std::max(1.0, sup_norm(book_equity(net).view()));
  }

  void validate() const {
    if (epsilon && !(*epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  }
};

struct SolveReport {
  EquityVector solution;
  std::size_t iterations = 0;
  bool converged = false;
  double residual = 0.0;
  /// Iterates moved in the direction the lattice theory predicts.
  bool monotone = true;
  SolutionKind kind = SolutionKind::greatest;
  /// Set for least solutions when some family is not continuous from below.
  bool continuity_warning = false;
  double epsilon = 0.0;
};

namespace detail {

// Φ with the external assets supplied separately, so callers can revalue a
// network under alternative asset scenarios without copying it.
template <ValuationModel Model>
void equity_map(const FinancialNetwork& net, std::span<const double> external_assets, const Model& model,
                std::span<const double> e, std::span<double> out) {
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double external = external_assets[i] * model.external(i, e) - net.external_liabilities(i);
    double inflow = 0.0;
    for (const Claim& c : net.claims_of(i)) inflow += c.amount * model.interbank(i, c.borrower, e);
    out[i] = external + inflow - net.obligations(i);
  }
}

}  // namespace detail

/// One application of the equity map Φ.
template <ValuationModel Model>
EquityVector picard_step(const FinancialNetwork& net, const Model& model, const EquityVector& equity) {
  if (equity.size() != net.size()) throw std::invalid_argument("picard_step: equity vector has wrong size");
  EquityVector next(net.size(), 0.0);
  detail::equity_map(net, net.external_assets(), model, equity.view(), next.values);
  return next;
}

inline EquityVector picard_step(const FinancialNetwork& net, const ValuationSpec& spec, const EquityVector& equity) {
  return picard_step(net, SpecValuation(net, spec), equity);
}

namespace detail {

template <ValuationModel Model>
SolveReport iterate(const FinancialNetwork& net, std::span<const double> external_assets, const Model& model,
                    EquityVector start, double epsilon, std::size_t max_iterations, SolutionKind kind) {
  SolveReport report;
  report.kind = kind;
  report.epsilon = epsilon;
  bool non_increasing = true;
  bool non_decreasing = true;
  EquityVector current = std::move(start);
  EquityVector next(current.size(), 0.0);
  for (std::size_t k = 1; k <= max_iterations; ++k) {
    equity_map(net, external_assets, model, current.view(), next.values);
    double step = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double d = next[i] - current[i];
      step = std::max(step, std::abs(d));
      if (d > kMonotoneSlack) non_increasing = false;
      if (d < -kMonotoneSlack) non_decreasing = false;
    }
    std::swap(current, next);
    report.iterations = k;
    report.residual = step;
    if (step <= epsilon) {
      report.converged = true;
      break;
    }
  }
  switch (kind) {
    case SolutionKind::greatest: report.monotone = non_increasing; break;
    case SolutionKind::least: report.monotone = non_decreasing; break;
    case SolutionKind::custom: report.monotone = non_increasing || non_decreasing; break;
  }
  report.solution = std::move(current);
  return report;
}

template <ValuationModel Model>
SolveReport iterate(const FinancialNetwork& net, const Model& model, EquityVector start, double epsilon,
                    std::size_t max_iterations, SolutionKind kind) {
  return iterate(net, net.external_assets(), model, std::move(start), epsilon, max_iterations, kind);
}

inline EquityVector clamp_to_lattice(const FinancialNetwork& net, const EquityVector& e) {
  if (e.size() != net.size()) throw std::invalid_argument("custom start has wrong size");
  const EquityVector lo = equity_lower_bound(net);
  const EquityVector hi = book_equity(net);
  EquityVector out(e.size(), 0.0);
  for (std::size_t i = 0; i < e.size(); ++i) out[i] = std::clamp(e[i], lo[i], hi[i]);
  return out;
}

template <class Model>
bool lacks_lower_continuity(const Model& model) {
  if constexpr (requires { model.spec(); }) {
    return !model.spec().continuous_from_below();
  } else {
    return false;
  }
}

}  // namespace detail

/// Iterates from the face values M; the start field of `cfg` is ignored.
template <ValuationModel Model>
SolveReport greatest_solution(const FinancialNetwork& net, const Model& model, const SolveConfig& cfg = {}) {
  cfg.validate();
  return detail::iterate(net, model, book_equity(net), cfg.effective_epsilon(net), cfg.max_iterations,
                         SolutionKind::greatest);
}

/// Iterates from the lower bounds m; the start field of `cfg` is ignored.
template <ValuationModel Model>
SolveReport least_solution(const FinancialNetwork& net, const Model& model, const SolveConfig& cfg = {}) {
  cfg.validate();
  SolveReport r = detail::iterate(net, model, equity_lower_bound(net), cfg.effective_epsilon(net),
                                  cfg.max_iterations, SolutionKind::least);
  r.continuity_warning = detail::lacks_lower_continuity(model);
  return r;
}

/// Dispatches on `cfg.start`. Custom starts are clamped into [m, M].
template <ValuationModel Model>
SolveReport solve(const FinancialNetwork& net, const Model& model, const SolveConfig& cfg = {}) {
  switch (cfg.start) {
    case StartKind::face_values: return greatest_solution(net, model, cfg);
    case StartKind::lower_bounds: return least_solution(net, model, cfg);
    case StartKind::custom: break;
  }
  cfg.validate();
  return detail::iterate(net, model, detail::clamp_to_lattice(net, cfg.custom_start), cfg.effective_epsilon(net),
                         cfg.max_iterations, SolutionKind::custom);
}

inline SolveReport greatest_solution(const FinancialNetwork& net, const ValuationSpec& spec,
                                     const SolveConfig& cfg = {}) {
  return greatest_solution(net, SpecValuation(net, spec), cfg);
}

inline SolveReport least_solution(const FinancialNetwork& net, const ValuationSpec& spec,
                                  const SolveConfig& cfg = {}) {
  return least_solution(net, SpecValuation(net, spec), cfg);
}

inline SolveReport solve(const FinancialNetwork& net, const ValuationSpec& spec, const SolveConfig& cfg = {}) {
  return solve(net, SpecValuation(net, spec), cfg);
}

enum class UniquenessStatus { unique, multiple, indeterminate };

inline const char* to_string(UniquenessStatus s) noexcept {
  switch (s) {
    case UniquenessStatus::unique: return "unique";
    case UniquenessStatus::multiple: return "multiple";
    case UniquenessStatus::indeterminate: return "indeterminate";
  }
  return "?";
}

struct UniquenessResult {
  UniquenessStatus status = UniquenessStatus::indeterminate;
  double gap = 0.0;
  SolveReport greatest;
  SolveReport least;
};

/// Solves from both ends of the lattice; unique when |E⁺ - E⁻| <= 2ε.
template <ValuationModel Model>
UniquenessResult uniqueness_check(const FinancialNetwork& net, const Model& model, const SolveConfig& cfg = {}) {
  UniquenessResult r;
  r.greatest = greatest_solution(net, model, cfg);
  r.least = least_solution(net, model, cfg);
  r.gap = sup_distance(r.greatest.solution.view(), r.least.solution.view());
  if (!r.greatest.converged || !r.least.converged) {
    r.status = UniquenessStatus::indeterminate;
  } else {
    r.status = r.gap <= 2.0 * r.greatest.epsilon ? UniquenessStatus::unique : UniquenessStatus::multiple;
  }
  return r;
}

inline UniquenessResult uniqueness_check(const FinancialNetwork& net, const ValuationSpec& spec,
                                         const SolveConfig& cfg = {}) {
  return uniqueness_check(net, SpecValuation(net, spec), cfg);
}

/// Exact solve on an acyclic claim graph with unit external valuation.
///
/// Bank values settle layer by layer away from the sources, so the iterate
/// stops changing bit for bit after at most depth + 1 applications. The
/// report is converged only when the final step is exactly zero.
/// Throws std::invalid_argument when the preconditions do not hold.
inline SolveReport solve_dag(const FinancialNetwork& net, const ValuationSpec& spec, const SolveConfig& cfg = {}) {
  const TopologyInfo topo = topology(net);
  if (!topo.is_dag) throw std::invalid_argument("solve_dag: claim graph has a cycle");
  if (spec.external_kind != ExternalKind::unit)
    throw std::invalid_argument("solve_dag: external valuation must be unit");
  if (spec.lender_dependent())
    throw std::invalid_argument("solve_dag: interbank valuation must depend on the borrower only");
  cfg.validate();
  const SpecValuation model(net, spec);
  const std::size_t bound = *topo.dag_depth + 1;
  return detail::iterate(net, model, book_equity(net), 0.0, std::min(bound, cfg.max_iterations),
                         SolutionKind::greatest);
}

}  // namespace neva
