#pragma once

#include <random>
#include <string>
#include <vector>

#include "neva/network.hpp"

namespace fixture {

using neva::FinancialNetwork;

// liabilities given as {debtor, creditor, amount} on bank indices
struct Edge {
  std::size_t debtor, creditor;
  double amount;
};

inline FinancialNetwork make(std::vector<double> ext_assets, std::vector<double> ext_liabs, std::vector<Edge> edges) {
  const std::size_t n = ext_assets.size();
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::string(1, static_cast<char>('A' + i)));
  std::vector<double> l(n * n, 0.0);
  for (const Edge& e : edges) l[e.debtor * n + e.creditor] += e.amount;
  return FinancialNetwork(std::move(ids), std::move(ext_assets), std::move(ext_liabs), std::move(l));
}

// Three-bank ring A -> B -> C -> A of 0.5 claims, book equity 1 each.
inline FinancialNetwork ring() { return make({10, 5, 3}, {9, 4, 2}, {{1, 0, 0.5}, {2, 1, 0.5}, {0, 2, 0.5}}); }

// Same ring with external liabilities (9, 4, 3) as printed in the source table.
inline FinancialNetwork ring_printed() {
  return make({10, 5, 3}, {9, 4, 3}, {{1, 0, 0.5}, {2, 1, 0.5}, {0, 2, 0.5}});
}

inline FinancialNetwork open_chain() { return make({1, 1, 1}, {0, 0, 0}, {{1, 0, 1.2}, {2, 1, 1.2}}); }
inline FinancialNetwork tree() { return make({1, 0.1, 1}, {0, 0, 0}, {{1, 0, 1.0}, {2, 0, 1.0}}); }
inline FinancialNetwork closed_chain() {
  return make({1, 1, 1}, {0, 0, 0}, {{1, 0, 1.1}, {2, 1, 1.2}, {0, 2, 1.5}});
}

// Random sparse network with n in [2, max_n]. With `acyclic`, edges only run
// from higher to lower index (debtor > creditor), so claims form a DAG.
inline FinancialNetwork random_network(std::mt19937_64& rng, std::size_t max_n = 10, bool acyclic = false,
                                       double density = 0.35) {
  std::uniform_int_distribution<std::size_t> size(2, max_n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = size(rng);
  std::vector<double> a(n), le(n);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = 0.5 + 4.5 * unit(rng);
    le[i] = 0.1 + 4.0 * unit(rng);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || (acyclic && i < j)) continue;
      if (unit(rng) < density) edges.push_back({i, j, 0.1 + 2.0 * unit(rng)});
    }
  return make(std::move(a), std::move(le), std::move(edges));
}

}  // namespace fixture
