#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "neva/network.hpp"

using namespace neva;

namespace {

void expect_values(const std::vector<double>& got, std::vector<double> want, double tol = 1e-12) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "index " << i;
}

}  // namespace

TEST(BookEquity, RingHasUnitEquity) { expect_values(book_equity(fixture::ring()).values, {1, 1, 1}); }

TEST(BookEquity, PrintedRingTableGivesLastBankZero) {
  expect_values(book_equity(fixture::ring_printed()).values, {1, 1, 0});
}

TEST(BookEquity, NoInterbankMatchingExternals) {
  auto net = fixture::make({2, 3}, {2, 3}, {});
  expect_values(book_equity(net).values, {0, 0});
}

TEST(BookEquity, ClosedChain) { expect_values(book_equity(fixture::closed_chain()).values, {0.6, 1.1, 1.3}); }

TEST(LowerBound, PrintedRing) { expect_values(equity_lower_bound(fixture::ring_printed()).values, {-9.5, -4.5, -3.5}); }

TEST(LowerBound, NoLiabilities) {
  auto net = fixture::make({1, 2}, {0, 0}, {});
  expect_values(equity_lower_bound(net).values, {0, 0});
}

TEST(LowerBound, OpenChain) { expect_values(equity_lower_bound(fixture::open_chain()).values, {0, -1.2, -1.2}); }

TEST(Obligations, RingAndClosedChain) {
  expect_values(total_obligations(fixture::ring()), {0.5, 0.5, 0.5});
  expect_values(total_obligations(fixture::closed_chain()), {1.5, 1.1, 1.2});
  expect_values(total_obligations(fixture::make({1, 1}, {1, 0}, {})), {0, 0});
}

TEST(Network, ClaimsAreTransposeOfLiabilities) {
  auto net = fixture::closed_chain();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(net.claim(j, i), net.liability(i, j));
  EXPECT_DOUBLE_EQ(net.claim(0, 1), 1.1);  // A holds B's debt
}

TEST(Network, RejectsInvalidInput) {
  EXPECT_THROW(fixture::make({-1, 1}, {0, 0}, {}), std::invalid_argument);
  EXPECT_THROW(fixture::make({1, 1}, {0, std::numeric_limits<double>::infinity()}, {}), std::invalid_argument);
  EXPECT_THROW(fixture::make({1, 1}, {0, 0}, {{0, 0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(fixture::make({1, 1}, {0, 0}, {{0, 1, -0.5}}), std::invalid_argument);
  EXPECT_THROW(FinancialNetwork({"A", "A"}, {1, 1}, {0, 0}, {0, 0, 0, 0}), std::invalid_argument);
  EXPECT_THROW(FinancialNetwork({"A", "B"}, {1, 1}, {0, 0}, {0, 0, 0}), std::invalid_argument);
}

TEST(Shock, IdentityAndTotal) {
  auto net = fixture::ring();
  EXPECT_EQ(apply_shock(net, 0.0), net);
  auto wiped = apply_shock(net, 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(wiped.external_assets(i), 0.0);
}

TEST(Shock, RingFivePercent) {
  auto s = apply_shock(fixture::ring(), 0.05);
  expect_values({s.external_assets().begin(), s.external_assets().end()}, {9.5, 4.75, 2.85});
}

TEST(Shock, LeavesOriginalAndOtherFields) {
  auto net = fixture::ring();
  auto s = apply_shock(net, std::vector<double>{0.1, 0.2, 0.3});
  EXPECT_EQ(net.external_assets(0), 10.0);
  EXPECT_NEAR(s.external_assets(2), 2.1, 1e-15);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(s.external_liabilities(i), net.external_liabilities(i));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(s.liability(i, j), net.liability(i, j));
  }
}

TEST(Shock, OutOfRangeIsDomainError) {
  EXPECT_THROW(apply_shock(fixture::ring(), 1.5), std::domain_error);
  EXPECT_THROW(apply_shock(fixture::ring(), -0.1), std::domain_error);
  EXPECT_THROW(apply_shock(fixture::ring(), std::vector<double>{0.1, 0.2}), std::invalid_argument);
}

TEST(Topology, AppendixFixtures) {
  auto chain = topology(fixture::open_chain());
  EXPECT_TRUE(chain.is_dag);
  ASSERT_TRUE(chain.dag_depth.has_value());
  EXPECT_EQ(*chain.dag_depth, 2u);

  EXPECT_FALSE(topology(fixture::closed_chain()).is_dag);
  EXPECT_FALSE(topology(fixture::closed_chain()).dag_depth.has_value());

  auto t = topology(fixture::tree());
  EXPECT_TRUE(t.is_dag);
  EXPECT_EQ(*t.dag_depth, 1u);
  EXPECT_EQ(t.layer[0], 1u);
  EXPECT_EQ(t.layer[1], 0u);
}

TEST(Topology, EmptyGraphIsDepthZero) {
  auto t = topology(fixture::make({1, 1, 1}, {0, 0, 0}, {}));
  EXPECT_TRUE(t.is_dag);
  EXPECT_EQ(*t.dag_depth, 0u);
}

// Properties over random networks

TEST(NetworkProperty, BookMinusLowerBoundIsGrossAssets) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    auto net = fixture::random_network(rng);
    auto M = book_equity(net), m = equity_lower_bound(net);
    for (std::size_t i = 0; i < net.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < net.size(); ++j) row += net.claim(i, j);
      EXPECT_NEAR(M[i] - m[i], net.external_assets(i) + row, 1e-12);
    }
  }
}

TEST(NetworkProperty, ShockComposesAndIsMonotone) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    auto net = fixture::random_network(rng);
    const double a = u(rng), b = u(rng);
    EXPECT_EQ(apply_shock(apply_shock(net, a), 0.0), apply_shock(net, a));
    auto lo = apply_shock(net, std::max(a, b)), hi = apply_shock(net, std::min(a, b));
    for (std::size_t i = 0; i < net.size(); ++i) EXPECT_LE(lo.external_assets(i), hi.external_assets(i));
  }
}

TEST(NetworkProperty, TransposeOfDagIsDag) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    auto net = fixture::random_network(rng, 10, k % 2 == 0);
    const std::size_t n = net.size();
    std::vector<double> t(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) t[i * n + j] = net.liability(j, i);
    FinancialNetwork transposed(net.bank_ids(), {net.external_assets().begin(), net.external_assets().end()},
                                {net.external_liabilities().begin(), net.external_liabilities().end()}, t);
    const auto info = topology(net);
    if (info.is_dag) {
      EXPECT_TRUE(topology(transposed).is_dag);
      EXPECT_LT(*info.dag_depth, n);
    }
    if (k % 2 == 0) {
      EXPECT_TRUE(info.is_dag);
    }
  }
}
