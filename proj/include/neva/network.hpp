#pragma once

// Balance-sheet representation of a system of banks linked by interbank
// liabilities, plus the book-value quantities every valuation needs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace neva {

/// Per-bank equity values. Indexed in the network's bank order.
struct EquityVector {
  std::vector<double> values;

  EquityVector() = default;
  explicit EquityVector(std::vector<double> v) : values(std::move(v)) {}
  EquityVector(std::size_t n, double fill) : values(n, fill) {}

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::span<const double> view() const noexcept { return values; }

  friend bool operator==(const EquityVector&, const EquityVector&) = default;
};

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_distance: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double sup_norm(std::span<const double> a) {
  double d = 0.0;
  for (double x : a) d = std::max(d, std::abs(x));
  return d;
}

/// One nonzero interbank claim held by a lender: A[lender][borrower] = amount.
struct Claim {
  std::size_t borrower;
  double amount;
};

/// Immutable financial system.
///
/// `liability(i, j)` is what bank i owes bank j (L_ij); the matching asset of
/// bank j is `claim(j, i)`. All amounts are finite and nonnegative, and the
/// liability matrix has a zero diagonal. Construction throws
/// std::invalid_argument on any violation.
class FinancialNetwork {
 public:
  FinancialNetwork(std::vector<std::string> bank_ids, std::vector<double> external_assets,
                   std::vector<double> external_liabilities, std::vector<double> liabilities)
      : ids_(std::move(bank_ids)),
        ext_assets_(std::move(external_assets)),
        ext_liabilities_(std::move(external_liabilities)),
        liabilities_(std::move(liabilities)) {
    const std::size_t n = ids_.size();
    if (ext_assets_.size() != n || ext_liabilities_.size() != n)
      throw std::invalid_argument("external asset/liability vectors must have one entry per bank");
    if (liabilities_.size() != n * n)
      throw std::invalid_argument("liability matrix must be n x n");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids_) {
      if (id.empty()) throw std::invalid_argument("bank id must be non-empty");
      if (!seen.insert(id).second) throw std::invalid_argument("duplicate bank id '" + id + "'");
    }
    for (std::size_t i = 0; i < n; ++i) {
      check_amount(ext_assets_[i], "external_assets of bank '" + ids_[i] + "'");
      check_amount(ext_liabilities_[i], "external_liabilities of bank '" + ids_[i] + "'");
      for (std::size_t j = 0; j < n; ++j) {
        const double l = liabilities_[i * n + j];
        check_amount(l, "liability " + ids_[i] + " -> " + ids_[j]);
        if (i == j && l != 0.0)
          throw std::invalid_argument("self-loan on bank '" + ids_[i] + "' is not allowed");
      }
    }
    build_caches();
  }

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& bank_ids() const noexcept { return ids_; }
  const std::string& bank_id(std::size_t i) const { return ids_.at(i); }
  std::optional<std::size_t> index_of(const std::string& id) const {
    auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - ids_.begin());
  }

  double external_assets(std::size_t i) const { return ext_assets_[i]; }
  double external_liabilities(std::size_t i) const { return ext_liabilities_[i]; }
  std::span<const double> external_assets() const noexcept { return ext_assets_; }
  std::span<const double> external_liabilities() const noexcept { return ext_liabilities_; }

  /// L_ij: amount bank i owes bank j.
  double liability(std::size_t i, std::size_t j) const { return liabilities_[i * size() + j]; }
  /// A_ij: claim of bank i on bank j (= L_ji).
  double claim(std::size_t i, std::size_t j) const { return liabilities_[j * size() + i]; }
  std::span<const double> liability_matrix() const noexcept { return liabilities_; }

  /// Nonzero claims held by `lender`, in ascending borrower order.
  std::span<const Claim> claims_of(std::size_t lender) const { return claims_[lender]; }

  /// p̄_i = Σ_j L_ij.
  double obligations(std::size_t i) const { return obligations_[i]; }
  /// Σ_j A_ij.
  double interbank_assets(std::size_t i) const { return interbank_assets_[i]; }
  double total_interbank() const noexcept { return total_interbank_; }

  /// Copy with external assets replaced; everything else unchanged.
  FinancialNetwork with_external_assets(std::vector<double> assets) const {
    return FinancialNetwork(ids_, std::move(assets), ext_liabilities_, liabilities_);
  }

  friend bool operator==(const FinancialNetwork& a, const FinancialNetwork& b) {
    return a.ids_ == b.ids_ && a.ext_assets_ == b.ext_assets_ &&
           a.ext_liabilities_ == b.ext_liabilities_ && a.liabilities_ == b.liabilities_;
  }

 private:
  static void check_amount(double v, const std::string& what) {
    if (!std::isfinite(v)) throw std::invalid_argument(what + " is not finite");
    if (v < 0.0) throw std::invalid_argument(what + " is negative");
  }

  void build_caches() {
    const std::size_t n = size();
    obligations_.assign(n, 0.0);
    interbank_assets_.assign(n, 0.0);
    claims_.assign(n, {});
    total_interbank_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        obligations_[i] += liability(i, j);
        const double a = claim(i, j);
        interbank_assets_[i] += a;
        if (a > 0.0) claims_[i].push_back({j, a});
      }
      total_interbank_ += interbank_assets_[i];
    }
  }

  std::vector<std::string> ids_;
  std::vector<double> ext_assets_;
  std::vector<double> ext_liabilities_;
  std::vector<double> liabilities_;

  std::vector<double> obligations_;
  std::vector<double> interbank_assets_;
  std::vector<std::vector<Claim>> claims_;
  double total_interbank_ = 0.0;
};

// The book-equity sum is written in the same order as the equity map in
// solver.hpp so that a map evaluated with all valuations at one reproduces
// these values bit for bit.

/// M_i: equity with every asset at face value.
inline EquityVector book_equity(const FinancialNetwork& net) {
  EquityVector m(net.size(), 0.0);
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double external = net.external_assets(i) - net.external_liabilities(i);
    double inflow = 0.0;
    for (const Claim& c : net.claims_of(i)) inflow += c.amount;
    m[i] = external + inflow - net.obligations(i);
  }
  return m;
}

/// m_i: equity with every asset valued at zero.
inline EquityVector equity_lower_bound(const FinancialNetwork& net) {
  EquityVector m(net.size(), 0.0);
  for (std::size_t i = 0; i < net.size(); ++i)
    m[i] = -net.external_liabilities(i) - net.obligations(i);
  return m;
}

/// p̄_i = Σ_j L_ij.
inline std::vector<double> total_obligations(const FinancialNetwork& net) {
  std::vector<double> p(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) p[i] = net.obligations(i);
  return p;
}

/// A_i^e -> (1 - shock_i) A_i^e. Throws std::domain_error for fractions outside [0, 1].
inline FinancialNetwork apply_shock(const FinancialNetwork& net, std::span<const double> relative_shock) {
  if (relative_shock.size() != net.size())
    throw std::invalid_argument("apply_shock: one shock fraction per bank required");
  std::vector<double> assets(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double a = relative_shock[i];
    if (!(a >= 0.0 && a <= 1.0))
      throw std::domain_error("shock fraction for bank '" + net.bank_id(i) + "' outside [0, 1]");
    assets[i] = (1.0 - a) * net.external_assets(i);
  }
  return net.with_external_assets(std::move(assets));
}

inline FinancialNetwork apply_shock(const FinancialNetwork& net, double uniform_shock) {
  const std::vector<double> shock(net.size(), uniform_shock);
  return apply_shock(net, shock);
}

struct TopologyInfo {
  bool is_dag = false;
  /// Longest distance from the source set; present iff is_dag.
  std::optional<std::size_t> dag_depth;
  /// Per-bank longest distance to a source (empty unless is_dag).
  std::vector<std::size_t> layer;
};

/// Claim graph has an edge i -> j whenever A_ij > 0. Sources hold no claims.
inline TopologyInfo topology(const FinancialNetwork& net) {
  const std::size_t n = net.size();
  std::vector<std::size_t> in_degree(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (const Claim& c : net.claims_of(i)) ++in_degree[c.borrower];

  // Kahn: every edge i -> j places i before j.
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i)
    if (in_degree[i] == 0) stack.push_back(i);
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    order.push_back(i);
    for (const Claim& c : net.claims_of(i))
      if (--in_degree[c.borrower] == 0) stack.push_back(c.borrower);
  }

  TopologyInfo info;
  if (order.size() != n) return info;

  info.is_dag = true;
  info.layer.assign(n, 0);
  std::size_t depth = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    std::size_t d = 0;
    for (const Claim& c : net.claims_of(*it)) d = std::max(d, info.layer[c.borrower] + 1);
    info.layer[*it] = d;
    depth = std::max(depth, d);
  }
  info.dag_depth = depth;
  return info;
}

}  // namespace neva
