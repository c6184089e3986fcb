#pragma once

// Scenario-level experiments built on the solver: shock sweeps with the
// network-effect metric, single-name vs network discount comparison, limit
// experiments in the time to maturity and in the exogenous recovery, and a
// Monte Carlo estimate of the global (full-information) valuation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "neva/network.hpp"
#include "neva/solver.hpp"
#include "neva/valuation.hpp"

namespace neva {

/// Valuation of one interbank claim at the solved equities.
struct EdgeValue {
  std::size_t lender;
  std::size_t borrower;
  double amount;
  double value;
};

struct StressResult {
  double alpha = 0.0;
  std::vector<double> shock;
  bool converged = false;
  std::size_t iterations = 0;
  EquityVector equity;
  /// Book equity before the shock minus solved equity.
  std::vector<double> delta_equity;
  /// Direct external-asset loss α_i A_i^e.
  std::vector<double> delta_external;
  /// Σ A_ij (1 - V_ij(E*)).
  double write_offs = 0.0;
  /// Σ A_ij V_ij(E*), the complement of write_offs. Kept separately because
  /// it stays resolvable when write_offs rounds to the full exposure.
  double retained_value = 0.0;
  /// write_offs / Σ A_ij; absent when the solve did not converge.
  std::optional<double> network_effect;
  std::vector<EdgeValue> edges;
};

struct ShockScenario {
  double label;
  std::vector<double> fractions;
};

namespace detail {

inline void require_unit_fraction(double a, const char* what) {
  if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error(std::string(what) + " outside [0, 1]");
}

inline StressResult run_stress_point(const FinancialNetwork& net, const EquityVector& book_before,
                                     const ValuationSpec& spec, const ShockScenario& scenario,
                                     const SolveConfig& cfg) {
  const FinancialNetwork shocked = apply_shock(net, scenario.fractions);
  const SpecValuation model(shocked, spec);
  const SolveReport report = greatest_solution(shocked, model, cfg);

  StressResult r;
  r.alpha = scenario.label;
  r.shock = scenario.fractions;
  r.converged = report.converged;
  r.iterations = report.iterations;
  r.equity = report.solution;
  const std::size_t n = net.size();
  r.delta_equity.resize(n);
  r.delta_external.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.delta_equity[i] = book_before[i] - r.equity[i];
    r.delta_external[i] = net.external_assets(i) - shocked.external_assets(i);
    for (const Claim& c : net.claims_of(i)) {
      const double v = model.interbank(i, c.borrower, r.equity.view());
      r.edges.push_back({i, c.borrower, c.amount, v});
      r.write_offs += c.amount * (1.0 - v);
      r.retained_value += c.amount * v;
    }
  }
  if (r.converged) {
    const double total = net.total_interbank();
    r.network_effect = total > 0.0 ? std::clamp(r.write_offs / total, 0.0, 1.0) : 0.0;
  }
  return r;
}

}  // namespace detail

/// Solves the greatest solution after each shock and measures the losses
/// transmitted through interbank revaluation.
inline std::vector<StressResult> stress_test(const FinancialNetwork& net, const ValuationSpec& spec,
                                             std::span<const ShockScenario> scenarios, const SolveConfig& cfg = {}) {
  const EquityVector book_before = book_equity(net);
  std::vector<StressResult> out;
  out.reserve(scenarios.size());
  for (const ShockScenario& s : scenarios) out.push_back(detail::run_stress_point(net, book_before, spec, s, cfg));
  return out;
}

/// Uniform shocks: every bank loses the fraction α of its external assets.
inline std::vector<StressResult> stress_test(const FinancialNetwork& net, const ValuationSpec& spec,
                                             std::span<const double> alpha_grid, const SolveConfig& cfg = {}) {
  std::vector<ShockScenario> scenarios;
  scenarios.reserve(alpha_grid.size());
  for (double a : alpha_grid) {
    detail::require_unit_fraction(a, "shock alpha");
    scenarios.push_back({a, std::vector<double>(net.size(), a)});
  }
  return stress_test(net, spec, std::span<const ShockScenario>(scenarios), cfg);
}

struct DiscountDifference {
  std::size_t lender;
  std::size_t borrower;
  /// V_ij at the borrower's shocked book equity (single-name view).
  double single_name;
  /// V_ij at the borrower's solved equity.
  double network;
  double difference;
};

struct DiscountComparison {
  double alpha = 0.0;
  bool converged = false;
  std::vector<DiscountDifference> edges;
};

inline bool is_exante(InterbankKind k) noexcept {
  return k == InterbankKind::exante_en_gbm || k == InterbankKind::exante_en_uniform;
}

/// Compares each claim's discount evaluated at the borrower's shocked book
/// equity against the network-consistent discount at the solved equity.
inline std::vector<DiscountComparison> merton_vs_network_discount(const FinancialNetwork& net,
                                                                  const ValuationSpec& spec,
                                                                  std::span<const double> alpha_grid,
                                                                  const SolveConfig& cfg = {}) {
  if (!is_exante(spec.interbank_kind))
    throw std::invalid_argument("merton_vs_network_discount needs an ex-ante valuation family");
  std::vector<DiscountComparison> out;
  out.reserve(alpha_grid.size());
  for (double a : alpha_grid) {
    detail::require_unit_fraction(a, "shock alpha");
    const FinancialNetwork shocked = apply_shock(net, a);
    const SpecValuation model(shocked, spec);
    const SolveReport report = greatest_solution(shocked, model, cfg);
    const EquityVector book = book_equity(shocked);

    DiscountComparison c;
    c.alpha = a;
    c.converged = report.converged;
    for (std::size_t i = 0; i < net.size(); ++i) {
      for (const Claim& claim : net.claims_of(i)) {
        const double single = model.interbank(i, claim.borrower, book.view());
        const double network = model.interbank(i, claim.borrower, report.solution.view());
        c.edges.push_back({i, claim.borrower, single, network, single - network});
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

/// Solutions along a parameter sequence compared with a limiting solution.
struct LimitSeries {
  std::vector<double> parameters;
  std::vector<EquityVector> equities;
  std::vector<bool> converged;
  std::vector<double> deviations;
  EquityVector reference;
  bool reference_converged = false;
  /// Some member (or the reference) failed to converge.
  bool partial = false;
  /// Banks whose book equity is nonpositive (valued by convention).
  std::vector<std::size_t> flagged_banks;
};

namespace detail {

inline void require_strictly_decreasing(std::span<const double> seq, const char* what) {
  if (seq.empty()) throw std::invalid_argument(std::string(what) + " sequence is empty");
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (!std::isfinite(seq[k])) throw std::invalid_argument(std::string(what) + " sequence has a non-finite entry");
    if (k > 0 && !(seq[k] < seq[k - 1]))
      throw std::invalid_argument(std::string(what) + " sequence must be strictly decreasing");
  }
}

inline LimitSeries run_limit_series(const FinancialNetwork& net, std::span<const double> params,
                                    const ValuationSpec& reference_spec,
                                    const std::function<ValuationSpec(double)>& member_spec,
                                    const SolveConfig& cfg) {
  LimitSeries series;
  const SolveReport ref = greatest_solution(net, reference_spec, cfg);
  series.reference = ref.solution;
  series.reference_converged = ref.converged;
  series.partial = !ref.converged;
  for (double p : params) {
    const SolveReport r = greatest_solution(net, member_spec(p), cfg);
    series.parameters.push_back(p);
    series.equities.push_back(r.solution);
    series.converged.push_back(r.converged);
    series.deviations.push_back(sup_distance(r.solution.view(), ref.solution.view()));
    if (!r.converged) series.partial = true;
  }
  return series;
}

}  // namespace detail

/// Ex-ante GBM solutions for a decreasing sequence of times to maturity,
/// measured against the ex-post Eisenberg-Noe solution (recovery scaled by
/// the same β).
inline LimitSeries maturity_limit_experiment(const FinancialNetwork& net, std::vector<double> sigma,
                                             std::span<const double> tau_sequence, double beta,
                                             const SolveConfig& cfg = {}) {
  detail::require_strictly_decreasing(tau_sequence, "tau");
  if (!(tau_sequence.back() > 0.0)) throw std::invalid_argument("tau sequence must stay > 0");
  ValuationSpec reference = ValuationSpec::eisenberg_noe();
  reference.beta = beta;
  reference.validate(net.size());
  auto member = [&](double tau) {
    ValuationSpec s;
    s.interbank_kind = InterbankKind::exante_en_gbm;
    s.sigma = sigma;
    s.tau = tau;
    s.beta = beta;
    return s;
  };
  return detail::run_limit_series(net, tau_sequence, reference, member, cfg);
}

/// Uniform-shock ex-ante solutions for β decreasing towards 0, measured
/// against the linear DebtRank solution.
inline LimitSeries debtrank_limit_experiment(const FinancialNetwork& net, std::span<const double> beta_sequence,
                                             const SolveConfig& cfg = {}) {
  detail::require_strictly_decreasing(beta_sequence, "beta");
  for (double b : beta_sequence) detail::require_unit_fraction(b, "beta");
  LimitSeries series = detail::run_limit_series(
      net, beta_sequence, ValuationSpec::linear_debtrank(),
      [](double beta) { return ValuationSpec::exante_uniform(beta); }, cfg);
  const EquityVector book = book_equity(net);
  for (std::size_t j = 0; j < net.size(); ++j)
    if (book[j] <= 0.0) series.flagged_banks.push_back(j);
  return series;
}

// ---------------------------------------------------------------------------
// Monte Carlo global valuation

struct MonteCarloResult {
  std::vector<double> mean;
  std::vector<double> std_error;
  std::size_t samples = 0;
  std::size_t dropped = 0;
  /// False when more than 1% of the samples failed to converge.
  bool valid = false;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-sample engine seed, a function of (master seed, sample index) only.
inline std::uint64_t sample_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

struct ChunkSums {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::size_t used = 0;
  std::size_t dropped = 0;
};

inline constexpr std::size_t kMonteCarloChunk = 1024;

}  // namespace detail

/// Draws terminal external assets from independent zero-drift GBMs, solves
/// the ex-post Eisenberg-Noe greatest solution for each draw and averages
/// the equities.
///
/// Samples are grouped into fixed chunks reduced in ascending order, so the
/// result is bit-identical for any `threads` value.
inline MonteCarloResult monte_carlo_global_valuation(const FinancialNetwork& net, std::vector<double> sigma,
                                                     double tau, double beta, std::size_t samples,
                                                     std::uint64_t seed, const SolveConfig& cfg = {},
                                                     unsigned threads = 1) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be > 0");
  if (sigma.size() == 1) sigma.assign(net.size(), sigma.front());
  if (sigma.size() != net.size()) throw std::invalid_argument("sigma must be a scalar or one entry per bank");
  for (double s : sigma)
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("sigma must be > 0");
  detail::require_unit_fraction(beta, "beta");
  cfg.validate();

  const std::size_t n = net.size();
  ValuationSpec en = ValuationSpec::eisenberg_noe();
  en.beta = beta;
  const SpecValuation model(net, en);
  const EquityVector shift = book_equity(net);

  const std::size_t chunks = (samples + detail::kMonteCarloChunk - 1) / detail::kMonteCarloChunk;
  std::vector<detail::ChunkSums> partial(chunks);

  auto run_chunk = [&](std::size_t c) {
    detail::ChunkSums& out = partial[c];
    out.sum.assign(n, 0.0);
    out.sum_sq.assign(n, 0.0);
    std::vector<double> assets(n);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t begin = c * detail::kMonteCarloChunk;
    const std::size_t end = std::min(samples, begin + detail::kMonteCarloChunk);
    for (std::size_t s = begin; s < end; ++s) {
      std::mt19937_64 engine(detail::sample_seed(seed, s));
      normal.reset();
      for (std::size_t i = 0; i < n; ++i) {
        const double vol = sigma[i] * std::sqrt(tau);
        assets[i] = net.external_assets(i) * std::exp(vol * normal(engine) - 0.5 * vol * vol);
      }
      EquityVector start(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double external = assets[i] - net.external_liabilities(i);
        double inflow = 0.0;
        for (const Claim& cl : net.claims_of(i)) inflow += cl.amount;
        start[i] = external + inflow - net.obligations(i);
      }
      const double eps = cfg.epsilon ? *cfg.epsilon : 1e-10 * std::max(1.0, sup_norm(start.view()));
      const SolveReport r =
          detail::iterate(net, assets, model, std::move(start), eps, cfg.max_iterations, SolutionKind::greatest);
      if (!r.converged) {
        ++out.dropped;
        continue;
      }
      ++out.used;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = r.solution[i] - shift[i];
        out.sum[i] += d;
        out.sum_sq[i] += d * d;
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (workers == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < chunks; c = next++) run_chunk(c);
      });
  }

  MonteCarloResult result;
  result.samples = samples;
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  std::size_t used = 0;
  for (const detail::ChunkSums& p : partial) {
    used += p.used;
    result.dropped += p.dropped;
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] += p.sum[i];
      sum_sq[i] += p.sum_sq[i];
    }
  }
  result.mean.assign(n, 0.0);
  result.std_error.assign(n, 0.0);
  if (used > 0) {
    const double count = static_cast<double>(used);
    for (std::size_t i = 0; i < n; ++i) {
      const double m = sum[i] / count;
      result.mean[i] = shift[i] + m;
      if (used > 1) {
        const double var = std::max(0.0, (sum_sq[i] - count * m * m) / (count - 1.0));
        result.std_error[i] = std::sqrt(var / count);
      }
    }
  }
  result.valid = used > 0 && static_cast<double>(result.dropped) <= 0.01 * static_cast<double>(samples);
  return result;
}

}  // namespace neva
