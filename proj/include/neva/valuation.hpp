#pragma once

// Catalogue of feasible valuation functions. Every interbank function maps
// equities to [0, 1] and is nondecreasing in each equity argument.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "neva/network.hpp"

namespace neva {

namespace detail {

inline double clamp_unit(double v) noexcept { return std::clamp(v, 0.0, 1.0); }
inline double positive_part(double x) noexcept { return x > 0.0 ? x : 0.0; }

// ½[erf(b) - erf(a)] for a <= b, evaluated on whichever tail keeps precision.
inline double half_erf_difference(double a, double b) noexcept {
  if (!(a < b)) return 0.0;
  if (a >= 0.0) return 0.5 * (std::erfc(a) - std::erfc(b));
  if (b <= 0.0) return 0.5 * (std::erfc(-b) - std::erfc(-a));
  return 0.5 * (std::erf(b) - std::erf(a));
}

// Zero-drift GBM over horizon tau: X = A(T)/A(t) is log-normal with
// log X ~ N(-σ²τ/2, σ²τ). The erf arguments below are the standardized
// log-thresholds divided by √2.
struct LogNormalTerminal {
  double scale;      // σ √(2τ)
  double half_var;   // σ²τ / 2

  LogNormalTerminal(double sigma, double tau)
      : scale(sigma * std::sqrt(2.0 * tau)), half_var(0.5 * sigma * sigma * tau) {}

  // erf argument for P(X < x); -inf when x <= 0.
  double prob_arg(double x) const noexcept {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    return (std::log(x) + half_var) / scale;
  }
  // erf argument for E[X 1{X < x}].
  double mean_arg(double x) const noexcept {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    return (std::log(x) - half_var) / scale;
  }
};

inline void require_gbm_params(double external_assets, double sigma, double tau) {
  if (!(external_assets >= 0.0) || !std::isfinite(external_assets))
    throw std::domain_error("GBM valuation: external assets must be finite and >= 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::domain_error("GBM valuation: sigma must be > 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::domain_error("GBM valuation: time to maturity must be > 0");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ex-post families

/// Eisenberg-Noe pro-rata repayment of a borrower with equity E and
/// obligations p̄. A borrower with no obligations is valued at one.
inline double en_interbank(double equity, double obligations) noexcept {
  if (equity >= 0.0 || obligations <= 0.0) return 1.0;
  return detail::clamp_unit((equity + obligations) / obligations);
}

/// Eisenberg-Noe with the recovery branch scaled by an exogenous factor.
inline double en_interbank(double equity, double obligations, double recovery_scale) noexcept {
  if (equity >= 0.0 || obligations <= 0.0) return 1.0;
  return recovery_scale * detail::clamp_unit((equity + obligations) / obligations);
}

inline double rv_external(double equity, double alpha) noexcept { return equity >= 0.0 ? 1.0 : alpha; }

inline double rv_interbank(double lender_equity, double borrower_equity, double beta, double obligations) noexcept {
  return (lender_equity >= 0.0 ? 1.0 : beta) * en_interbank(borrower_equity, obligations);
}

inline double furfine_interbank(double equity, double recovery_rate) noexcept {
  return equity >= 0.0 ? 1.0 : recovery_rate;
}

/// Linear DebtRank: relative equity of the borrower, capped at one.
/// Banks with nonpositive book equity are valued at zero.
inline double debtrank_interbank(double equity, double book_equity) noexcept {
  if (book_equity <= 0.0) return 0.0;
  return std::min(detail::positive_part(equity) / book_equity, 1.0);
}

// ---------------------------------------------------------------------------
// Ex-ante families, GBM shocks

/// Probability that a borrower with current equity E is insolvent at
/// maturity when its external assets follow a zero-drift GBM.
///
/// With no external assets the terminal equity is deterministic and the
/// result is 1{E < 0}.
inline double gbm_default_probability(double equity, double external_assets, double sigma, double tau) {
  detail::require_gbm_params(external_assets, sigma, tau);
  if (external_assets == 0.0) return equity < 0.0 ? 1.0 : 0.0;
  if (equity >= external_assets) return 0.0;
  const detail::LogNormalTerminal dist(sigma, tau);
  return 0.5 * std::erfc(-dist.prob_arg(1.0 - equity / external_assets));
}

/// Expected pro-rata recovery E[((E(T) + p̄)/p̄) 1{-p̄ <= E(T) - ... < 0}] under
/// the same GBM shock model, i.e. the endogenous recovery rate.
///
/// The mean term carries the borrower's external assets as a factor: the
/// recovered amount scales with the asset position, not with its log.
inline double gbm_endogenous_recovery(double equity, double external_assets, double sigma, double tau,
                                      double obligations) {
  detail::require_gbm_params(external_assets, sigma, tau);
  if (!(obligations > 0.0)) return 0.0;
  if (external_assets == 0.0) {
    if (equity >= 0.0) return 0.0;
    return detail::clamp_unit((equity + obligations) / obligations);
  }
  if (equity >= external_assets) return 0.0;

  const detail::LogNormalTerminal dist(sigma, tau);
  // Default band in terms of X = A(T)/A(t): x_low <= X < x_high.
  const double x_high = 1.0 - equity / external_assets;
  const double x_low = 1.0 - (equity + obligations) / external_assets;

  const double band_prob = detail::half_erf_difference(dist.prob_arg(x_low), dist.prob_arg(x_high));
  const double band_mean = detail::half_erf_difference(dist.mean_arg(x_low), dist.mean_arg(x_high));

  const double rho = (1.0 + equity / obligations) * band_prob +
                     (external_assets / obligations) * (band_mean - band_prob);
  return detail::clamp_unit(rho);
}

/// 1 - p^D + β ρ, clamped to [0, 1].
inline double exante_en_interbank(double survival_probability, double recovery, double beta) noexcept {
  return detail::clamp_unit(survival_probability + beta * recovery);
}

inline double exante_en_gbm(double equity, double external_assets, double sigma, double tau,
                            double obligations, double beta) {
  detail::require_gbm_params(external_assets, sigma, tau);
  double survival;
  if (external_assets == 0.0) {
    survival = equity < 0.0 ? 0.0 : 1.0;
  } else if (equity >= external_assets) {
    survival = 1.0;
  } else {
    const detail::LogNormalTerminal dist(sigma, tau);
    survival = 0.5 * std::erfc(dist.prob_arg(1.0 - equity / external_assets));
  }
  if (beta == 0.0) return detail::clamp_unit(survival);
  return exante_en_interbank(survival,
                             gbm_endogenous_recovery(equity, external_assets, sigma, tau, obligations), beta);
}

// ---------------------------------------------------------------------------
// Ex-ante families, shocks uniform on [-M_j, 0]

inline double uniform_survival_probability(double equity, double book_equity) noexcept {
  if (book_equity <= 0.0) return 0.0;
  return detail::clamp_unit(detail::positive_part(equity) / book_equity);
}

inline double uniform_default_probability(double equity, double book_equity) noexcept {
  return 1.0 - uniform_survival_probability(equity, book_equity);
}

inline double uniform_endogenous_recovery(double equity, double book_equity, double obligations) noexcept {
  if (book_equity <= 0.0 || obligations <= 0.0) return 0.0;
  const double b = -detail::positive_part(equity);
  const double a = std::max(-obligations - equity, -book_equity);
  if (!(b > a)) return 0.0;
  const double denom = obligations * book_equity;
  return detail::clamp_unit((equity + obligations) / denom * (b - a) + (b * b - a * a) / (2.0 * denom));
}

inline double exante_en_uniform(double equity, double book_equity, double obligations, double beta) noexcept {
  const double survival = uniform_survival_probability(equity, book_equity);
  if (beta == 0.0) return survival;
  return exante_en_interbank(survival, uniform_endogenous_recovery(equity, book_equity, obligations), beta);
}

// ---------------------------------------------------------------------------
// Valuation specification

enum class ExternalKind { unit, rogers_veraart };

enum class InterbankKind {
  eisenberg_noe,
  rogers_veraart,
  furfine,
  linear_debtrank,
  exante_en_gbm,
  exante_en_uniform,
};

inline std::string_view to_string(ExternalKind k) noexcept {
  switch (k) {
    case ExternalKind::unit: return "unit";
    case ExternalKind::rogers_veraart: return "rogers_veraart";
  }
  return "?";
}

inline std::string_view to_string(InterbankKind k) noexcept {
  switch (k) {
    case InterbankKind::eisenberg_noe: return "eisenberg_noe";
    case InterbankKind::rogers_veraart: return "rogers_veraart";
    case InterbankKind::furfine: return "furfine";
    case InterbankKind::linear_debtrank: return "linear_debtrank";
    case InterbankKind::exante_en_gbm: return "exante_en_gbm";
    case InterbankKind::exante_en_uniform: return "exante_en_uniform";
  }
  return "?";
}

inline std::optional<ExternalKind> parse_external_kind(std::string_view s) {
  if (s == "unit") return ExternalKind::unit;
  if (s == "rogers_veraart") return ExternalKind::rogers_veraart;
  return std::nullopt;
}

inline std::optional<InterbankKind> parse_interbank_kind(std::string_view s) {
  for (auto k : {InterbankKind::eisenberg_noe, InterbankKind::rogers_veraart, InterbankKind::furfine,
                 InterbankKind::linear_debtrank, InterbankKind::exante_en_gbm, InterbankKind::exante_en_uniform})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

/// External and interbank valuation families with their parameters.
///
/// `beta` is the exogenous recovery factor for the ex-ante families and the
/// lender fire-sale factor for Rogers-Veraart; for Eisenberg-Noe it scales
/// the recovery branch and defaults to 1 (plain clearing). `sigma` holds
/// either one volatility shared by all banks or one per bank.
struct ValuationSpec {
  ExternalKind external_kind = ExternalKind::unit;
  double alpha = 1.0;
  InterbankKind interbank_kind = InterbankKind::eisenberg_noe;
  double beta = 1.0;
  double recovery_rate = 0.0;
  std::vector<double> sigma;
  double tau = 0.0;

  static ValuationSpec eisenberg_noe() { return {}; }
  static ValuationSpec furfine(double r) {
    ValuationSpec s;
    s.interbank_kind = InterbankKind::furfine;
    s.recovery_rate = r;
    return s;
  }
  static ValuationSpec rogers_veraart(double alpha, double beta) {
    ValuationSpec s;
    s.external_kind = ExternalKind::rogers_veraart;
    s.alpha = alpha;
    s.interbank_kind = InterbankKind::rogers_veraart;
    s.beta = beta;
    return s;
  }
  static ValuationSpec linear_debtrank() {
    ValuationSpec s;
    s.interbank_kind = InterbankKind::linear_debtrank;
    return s;
  }
  static ValuationSpec exante_gbm(double sigma, double tau, double beta) {
    ValuationSpec s;
    s.interbank_kind = InterbankKind::exante_en_gbm;
    s.sigma = {sigma};
    s.tau = tau;
    s.beta = beta;
    return s;
  }
  static ValuationSpec exante_uniform(double beta) {
    ValuationSpec s;
    s.interbank_kind = InterbankKind::exante_en_uniform;
    s.beta = beta;
    return s;
  }

  double sigma_of(std::size_t bank) const {
    if (sigma.empty()) return 0.0;
    return sigma.size() == 1 ? sigma.front() : sigma.at(bank);
  }

  /// True when an interbank value depends on the lender's equity too.
  bool lender_dependent() const noexcept { return interbank_kind == InterbankKind::rogers_veraart; }

  /// Whether every family in the spec is continuous from below, which the
  /// least-solution iteration needs to reach E⁻.
  bool continuous_from_below() const noexcept {
    if (external_kind == ExternalKind::rogers_veraart && alpha < 1.0) return false;
    switch (interbank_kind) {
      case InterbankKind::eisenberg_noe: return beta >= 1.0;
      case InterbankKind::rogers_veraart: return beta >= 1.0;
      case InterbankKind::furfine: return recovery_rate >= 1.0;
      default: return true;
    }
  }

  /// Throws std::invalid_argument when a parameter is out of range.
  /// `banks` is the network size, used to check per-bank volatilities.
  void validate(std::size_t banks) const {
    auto unit_interval = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
    };
    if (external_kind == ExternalKind::rogers_veraart) unit_interval(alpha, "alpha");
    switch (interbank_kind) {
      case InterbankKind::eisenberg_noe:
      case InterbankKind::rogers_veraart:
      case InterbankKind::exante_en_uniform:
        unit_interval(beta, "beta");
        break;
      case InterbankKind::furfine:
        unit_interval(recovery_rate, "recovery_rate");
        break;
      case InterbankKind::linear_debtrank:
        break;
      case InterbankKind::exante_en_gbm:
        unit_interval(beta, "beta");
        if (!(tau > 0.0) || !std::isfinite(tau))
          throw std::invalid_argument("exante_en_gbm needs tau > 0 (use eisenberg_noe at maturity)");
        if (sigma.empty()) throw std::invalid_argument("exante_en_gbm needs sigma");
        if (sigma.size() != 1 && sigma.size() != banks)
          throw std::invalid_argument("sigma must be a scalar or have one entry per bank");
        for (double s : sigma)
          if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("sigma must be > 0");
        break;
    }
  }

  std::string describe() const {
    std::ostringstream os;
    os << "external=" << to_string(external_kind);
    if (external_kind == ExternalKind::rogers_veraart) os << "(alpha=" << alpha << ")";
    os << " interbank=" << to_string(interbank_kind);
    switch (interbank_kind) {
      case InterbankKind::furfine: os << "(R=" << recovery_rate << ")"; break;
      case InterbankKind::linear_debtrank: break;
      case InterbankKind::exante_en_gbm:
        os << "(beta=" << beta << ", tau=" << tau << ", sigma=";
        for (std::size_t k = 0; k < sigma.size(); ++k) os << (k ? "," : "") << sigma[k];
        os << ")";
        break;
      default: os << "(beta=" << beta << ")"; break;
    }
    return os.str();
  }
};

/// Per-borrower constants an interbank valuation may read.
struct BorrowerTerms {
  double obligations = 0.0;      // p̄_j
  double book_equity = 0.0;      // M_j
  double external_assets = 0.0;  // A_j^e
  double sigma = 0.0;
};

inline double external_value(const ValuationSpec& spec, double equity) noexcept {
  return spec.external_kind == ExternalKind::rogers_veraart ? rv_external(equity, spec.alpha) : 1.0;
}

inline double interbank_value(const ValuationSpec& spec, double lender_equity, double borrower_equity,
                              const BorrowerTerms& t) {
  switch (spec.interbank_kind) {
    case InterbankKind::eisenberg_noe: return en_interbank(borrower_equity, t.obligations, spec.beta);
    case InterbankKind::rogers_veraart:
      return rv_interbank(lender_equity, borrower_equity, spec.beta, t.obligations);
    case InterbankKind::furfine: return furfine_interbank(borrower_equity, spec.recovery_rate);
    case InterbankKind::linear_debtrank: return debtrank_interbank(borrower_equity, t.book_equity);
    case InterbankKind::exante_en_gbm:
      return exante_en_gbm(borrower_equity, t.external_assets, t.sigma, spec.tau, t.obligations, spec.beta);
    case InterbankKind::exante_en_uniform:
      return exante_en_uniform(borrower_equity, t.book_equity, t.obligations, spec.beta);
  }
  return 1.0;
}

// ---------------------------------------------------------------------------
// Valuation models consumed by the solver

/// A model values external assets of bank i and the claim of i on j given
/// the full equity vector.
template <class M>
concept ValuationModel = requires(const M& m, std::size_t i, std::span<const double> e) {
  { m.external(i, e) } -> std::convertible_to<double>;
  { m.interbank(i, i, e) } -> std::convertible_to<double>;
};

/// Lender i, borrower j and the network constants for one evaluation.
struct EvalContext {
  std::size_t lender;
  std::size_t borrower;
  std::span<const double> equity;
  BorrowerTerms terms;
};

/// Binds a ValuationSpec to the constants of one network.
class SpecValuation {
 public:
  SpecValuation(const FinancialNetwork& net, ValuationSpec spec) : spec_(std::move(spec)) {
    spec_.validate(net.size());
    const EquityVector book = book_equity(net);
    terms_.resize(net.size());
    for (std::size_t j = 0; j < net.size(); ++j)
      terms_[j] = {net.obligations(j), book[j], net.external_assets(j), spec_.sigma_of(j)};
  }

  double external(std::size_t i, std::span<const double> equity) const noexcept {
    return external_value(spec_, equity[i]);
  }

  double interbank(std::size_t i, std::size_t j, std::span<const double> equity) const {
    return interbank_value(spec_, equity[i], equity[j], terms_[j]);
  }

  double evaluate(const EvalContext& ctx) const {
    return interbank_value(spec_, ctx.equity[ctx.lender], ctx.equity[ctx.borrower], ctx.terms);
  }

  EvalContext context(std::size_t i, std::size_t j, std::span<const double> equity) const {
    return {i, j, equity, terms_[j]};
  }

  bool external_is_unit() const noexcept { return spec_.external_kind == ExternalKind::unit; }
  bool borrower_only() const noexcept { return !spec_.lender_dependent(); }
  const ValuationSpec& spec() const noexcept { return spec_; }
  const BorrowerTerms& terms(std::size_t j) const { return terms_.at(j); }

 private:
  ValuationSpec spec_;
  std::vector<BorrowerTerms> terms_;
};

static_assert(ValuationModel<SpecValuation>);

// ---------------------------------------------------------------------------
// Feasibility probing

struct FeasibilityViolation {
  std::string family;
  std::string parameters;
  std::string reason;
  double equity_before = 0.0;
  double equity_after = 0.0;
  double value_before = 0.0;
  double value_after = 0.0;
};

struct FeasibilityReport {
  bool passed = true;
  std::size_t points_checked = 0;
  std::optional<FeasibilityViolation> violation;
};

/// Evenly spaced grid including both ends.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points < 2) return {lo};
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k)
    g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  g.back() = hi;
  return g;
}

/// Checks that `f` maps the ascending `grid` into [0, 1] and is
/// nondecreasing along it, up to `slack` for rounding.
template <class F>
FeasibilityReport probe_curve(const std::string& family, const std::string& parameters, F&& f,
                              std::span<const double> grid, double slack = 1e-12) {
  FeasibilityReport report;
  double prev_e = 0.0, prev_v = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double e = grid[k];
    const double v = f(e);
    ++report.points_checked;
    if (!(v >= 0.0 && v <= 1.0)) {
      report.passed = false;
      report.violation = FeasibilityViolation{family, parameters, "value outside [0, 1]", e, e, v, v};
      return report;
    }
    if (k > 0 && v < prev_v - slack) {
      report.passed = false;
      report.violation = FeasibilityViolation{family, parameters, "decreasing step", prev_e, e, prev_v, v};
      return report;
    }
    prev_e = e;
    prev_v = v;
  }
  return report;
}

/// Probes the spec's interbank family along a borrower-equity grid. For
/// lender-dependent families the lender axis is probed as well, with the
/// other argument pinned on both sides of the solvency boundary.
inline FeasibilityReport feasibility_probe(const ValuationSpec& spec, const BorrowerTerms& terms,
                                           std::span<const double> grid, double slack = 1e-12) {
  const std::string family(to_string(spec.interbank_kind));
  const std::string params = spec.describe();
  FeasibilityReport total;
  auto merge = [&](const FeasibilityReport& r) {
    total.points_checked += r.points_checked;
    if (!r.passed && total.passed) {
      total.passed = false;
      total.violation = r.violation;
    }
  };
  for (double pinned : {1.0, -1.0}) {
    merge(probe_curve(
        family, params, [&](double e) { return interbank_value(spec, pinned, e, terms); }, grid, slack));
    if (!spec.lender_dependent()) break;
    merge(probe_curve(
        family, params + " [lender axis]", [&](double e) { return interbank_value(spec, e, pinned, terms); },
        grid, slack));
  }
  if (spec.external_kind != ExternalKind::unit)
    merge(probe_curve(
        std::string(to_string(spec.external_kind)) + " external", params,
        [&](double e) { return external_value(spec, e); }, grid, slack));
  return total;
}

}  // namespace neva
