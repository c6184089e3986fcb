#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "neva/valuation.hpp"

using namespace neva;

TEST(EisenbergNoe, Examples) {
  EXPECT_EQ(en_interbank(0.5, 2), 1.0);
  EXPECT_EQ(en_interbank(-1, 2), 0.5);
  EXPECT_EQ(en_interbank(-3, 2), 0.0);
  EXPECT_EQ(en_interbank(0.0, 2), 1.0);
  // nobody holds a claim on a bank that owes nothing
  EXPECT_EQ(en_interbank(-1, 0), 1.0);
  EXPECT_EQ(en_interbank(-1, 2, 0.5), 0.25);
}

TEST(RogersVeraart, Examples) {
  EXPECT_EQ(rv_external(0, 0.3), 1.0);
  EXPECT_EQ(rv_external(-0.01, 0.3), 0.3);
  EXPECT_EQ(rv_external(5, 0), 1.0);
  EXPECT_EQ(rv_interbank(1, 1, 0.5, 2), 1.0);
  EXPECT_EQ(rv_interbank(-1, 1, 0.5, 2), 0.5);
  EXPECT_EQ(rv_interbank(-1, -1, 0.5, 2), 0.25);
}

TEST(Furfine, Examples) {
  EXPECT_EQ(furfine_interbank(-0.5, 0), 0.0);
  EXPECT_EQ(furfine_interbank(0.5, 0), 1.0);
  EXPECT_EQ(furfine_interbank(-0.5, 1), 1.0);
}

TEST(DebtRank, Examples) {
  EXPECT_EQ(debtrank_interbank(1.25, 2.5), 0.5);
  EXPECT_EQ(debtrank_interbank(-1, 2.5), 0.0);
  EXPECT_EQ(debtrank_interbank(2.5, 2.5), 1.0);
  EXPECT_EQ(debtrank_interbank(3, 2.5), 1.0);
  EXPECT_EQ(debtrank_interbank(1, 0), 0.0);
  EXPECT_EQ(debtrank_interbank(1, -1), 0.0);
}

TEST(GbmDefault, MedianAndTails) {
  const double sigma = 1, tau = 1, a = 1;
  const double median = a * (1 - std::exp(-sigma * sigma * tau / 2));
  EXPECT_NEAR(gbm_default_probability(median, a, sigma, tau), 0.5, 1e-15);
  EXPECT_NEAR(gbm_default_probability(-1e9, a, sigma, tau), 1.0, 1e-12);
  EXPECT_EQ(gbm_default_probability(1.0, a, sigma, tau), 0.0);
  EXPECT_EQ(gbm_default_probability(2.0, a, sigma, tau), 0.0);
}

TEST(GbmDefault, MatchesQuadrature) {
  EXPECT_NEAR(gbm_default_probability(0.5, 1, 1, 1), oracle::gbm_default_probability(0.5, 1, 1, 1), 1e-8);
}

TEST(GbmDefault, NoAssetsIsDegenerate) {
  EXPECT_EQ(gbm_default_probability(-0.1, 0, 1, 1), 1.0);
  EXPECT_EQ(gbm_default_probability(0.0, 0, 1, 1), 0.0);
  EXPECT_NEAR(gbm_endogenous_recovery(-0.5, 0, 1, 1, 2), 0.75, 1e-15);
  EXPECT_EQ(gbm_endogenous_recovery(0.5, 0, 1, 1, 2), 0.0);
}

TEST(GbmDefault, RejectsBadParameters) {
  EXPECT_THROW(gbm_default_probability(0, 1, 0, 1), std::domain_error);
  EXPECT_THROW(gbm_default_probability(0, 1, 1, 0), std::domain_error);
  EXPECT_THROW(gbm_default_probability(0, -1, 1, 1), std::domain_error);
}

TEST(GbmRecovery, Examples) {
  EXPECT_EQ(gbm_endogenous_recovery(1.0, 1, 1, 1, 2), 0.0);
  EXPECT_NEAR(gbm_endogenous_recovery(-1e9, 1, 1, 1, 2), 0.0, 1e-12);
  EXPECT_EQ(gbm_endogenous_recovery(-0.5, 1, 1, 1, 0), 0.0);
  EXPECT_NEAR(gbm_endogenous_recovery(-0.5, 1, 1, 1, 2), oracle::gbm_recovery(-0.5, 1, 1, 1, 2), 1e-8);
}

TEST(GbmRecovery, QuadratureGridWithLargeAssets) {
  // scaling A^e by 3 changes the recovered amount; a missing asset factor
  // in the closed form would show up here
  for (double e : {-2.5, -1.0, -0.2, 0.5, 2.0, 2.9})
    EXPECT_NEAR(gbm_endogenous_recovery(e, 3, 0.2, 1, 2), oracle::gbm_recovery(e, 3, 0.2, 1, 2), 1e-8) << e;
}

TEST(GbmRecovery, ContinuousAtIndicatorBoundaries) {
  const double a = 1, pbar = 0.5, s = 0.7, t = 0.5;
  for (double edge : {a, a - pbar}) {
    const double h = 1e-9;
    EXPECT_NEAR(gbm_endogenous_recovery(edge - h, a, s, t, pbar), gbm_endogenous_recovery(edge + h, a, s, t, pbar),
                1e-6);
    EXPECT_NEAR(exante_en_gbm(edge - h, a, s, t, pbar, 1), exante_en_gbm(edge + h, a, s, t, pbar, 1), 1e-6);
  }
}

TEST(ExanteGbm, Examples) {
  EXPECT_EQ(exante_en_gbm(1.0, 1, 1, 1, 2, 1), 1.0);
  for (double e : {-3.0, -0.5, 0.0, 0.4}) {
    EXPECT_NEAR(exante_en_gbm(e, 1, 1, 1, 2, 0), 1 - gbm_default_probability(e, 1, 1, 1), 1e-15);
  }
}

TEST(ExanteGbm, MatchesMonteCarlo) {
  // σ=1, τ=1, A^e=1, p̄=2, β=1
  int k = 0;
  for (double e : {-2.5, -1.5, -0.8, -0.3, 0.0, 0.3, 0.6}) {
    const auto est = oracle::gbm_exante_monte_carlo(e, 1, 1, 1, 2, 1, 1000000, 100 + k++);
    const double v = exante_en_gbm(e, 1, 1, 1, 2, 1);
    EXPECT_LE(std::abs(v - est.mean), 3 * est.std_error + 1e-12) << "E=" << e;
  }
}

TEST(ExanteGbm, ApproachesEisenbergNoeAtShortMaturity) {
  const double pbar = 2, a = 1;
  for (double e : linear_grid(-3, 1, 401)) {
    if (std::abs(e) < 0.01 || std::abs(e + pbar) < 0.01) continue;
    EXPECT_NEAR(exante_en_gbm(e, a, 1, 1e-6, pbar, 1), en_interbank(e, pbar), 1e-3) << e;
  }
}

TEST(ExanteGbm, DefaultProbabilityMonotone) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 2000; ++k) {
    const double a = 3 * u(rng), s = 0.05 + 2 * u(rng), t = 0.01 + 2 * u(rng);
    const double e = -4 + 8 * u(rng), p = 3 * u(rng);
    EXPECT_GE(gbm_default_probability(e, a, s, t) - gbm_default_probability(e + p, a, s, t), 0.0);
  }
}

TEST(Uniform, DefaultProbabilityExamples) {
  EXPECT_EQ(uniform_default_probability(1, 2), 0.5);
  EXPECT_EQ(uniform_default_probability(-1, 2), 1.0);
  EXPECT_EQ(uniform_default_probability(2, 2), 0.0);
  EXPECT_EQ(uniform_default_probability(1, 0), 1.0);
}

TEST(Uniform, RecoveryExamples) {
  EXPECT_EQ(uniform_endogenous_recovery(-1.5, 2, 1), 0.0);
  EXPECT_EQ(uniform_endogenous_recovery(-1, 2, 1), 0.0);
  EXPECT_NEAR(uniform_endogenous_recovery(0.5, 2, 1), oracle::uniform_recovery(0.5, 2, 1), 1e-10);
  EXPECT_NEAR(uniform_endogenous_recovery(-0.5, 2, 1), oracle::uniform_recovery(-0.5, 2, 1), 1e-10);
  EXPECT_EQ(uniform_endogenous_recovery(0.5, 0, 1), 0.0);
  EXPECT_EQ(uniform_endogenous_recovery(0.5, 2, 0), 0.0);
}

TEST(Uniform, ZeroBetaIsDebtRank) {
  for (double M : {0.5, 1.0, 2.5})
    for (double e : linear_grid(-3, M, 301)) EXPECT_NEAR(exante_en_uniform(e, M, 1.3, 0.0), debtrank_interbank(e, M), 1e-12);
}

TEST(Spec, ValidationRejectsOutOfRange) {
  EXPECT_THROW(ValuationSpec::furfine(1.5).validate(1), std::invalid_argument);
  EXPECT_THROW(ValuationSpec::rogers_veraart(-0.1, 0.5).validate(1), std::invalid_argument);
  EXPECT_THROW(ValuationSpec::exante_gbm(1, 0, 1).validate(1), std::invalid_argument);
  EXPECT_THROW(ValuationSpec::exante_gbm(-1, 1, 1).validate(1), std::invalid_argument);
  ValuationSpec s = ValuationSpec::exante_gbm(1, 1, 1);
  s.sigma = {1, 1};
  EXPECT_THROW(s.validate(3), std::invalid_argument);
  EXPECT_NO_THROW(s.validate(2));
}

TEST(Spec, KindNamesRoundTrip) {
  for (auto k : {InterbankKind::eisenberg_noe, InterbankKind::rogers_veraart, InterbankKind::furfine,
                 InterbankKind::linear_debtrank, InterbankKind::exante_en_gbm, InterbankKind::exante_en_uniform})
    EXPECT_EQ(parse_interbank_kind(to_string(k)), k);
  EXPECT_FALSE(parse_interbank_kind("merton").has_value());
  EXPECT_EQ(parse_external_kind("rogers_veraart"), ExternalKind::rogers_veraart);
}

TEST(Feasibility, ExamplesPass) {
  const auto grid = linear_grid(-5, 5, 1001);
  EXPECT_TRUE(feasibility_probe(ValuationSpec::eisenberg_noe(), {2, 0, 0, 0}, grid).passed);
  EXPECT_TRUE(feasibility_probe(ValuationSpec::exante_gbm(1, 1, 1), {2, 0, 1, 1}, grid).passed);
}

TEST(Feasibility, CorruptedFamilyFails) {
  const auto grid = linear_grid(-5, 5, 101);
  auto report = probe_curve("negated_en", "p=2", [](double e) { return -en_interbank(e, 2); }, grid);
  ASSERT_FALSE(report.passed);
  ASSERT_TRUE(report.violation.has_value());
  EXPECT_EQ(report.violation->family, "negated_en");

  auto decreasing = probe_curve("reversed_en", "p=2", [](double e) { return en_interbank(-e, 2); }, grid);
  ASSERT_FALSE(decreasing.passed);
  EXPECT_EQ(decreasing.violation->reason, "decreasing step");
  EXPECT_LT(decreasing.violation->value_after, decreasing.violation->value_before);
}

TEST(Feasibility, RandomizedParameterDraws) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 300; ++k) {
    const double beta = u(rng), pbar = 3 * u(rng), M = -0.5 + 3 * u(rng), a = 3 * u(rng);
    const auto grid = linear_grid(-pbar - 1 - 2 * u(rng), std::max(M, a) + 1, 400);
    const BorrowerTerms terms{pbar, M, a, 0.05 + 2 * u(rng)};
    std::vector<ValuationSpec> specs = {ValuationSpec::eisenberg_noe(), ValuationSpec::furfine(u(rng)),
                                        ValuationSpec::rogers_veraart(u(rng), beta), ValuationSpec::linear_debtrank(),
                                        ValuationSpec::exante_gbm(terms.sigma, 0.01 + 3 * u(rng), beta),
                                        ValuationSpec::exante_uniform(beta)};
    for (const auto& s : specs) {
      auto r = feasibility_probe(s, terms, grid);
      EXPECT_TRUE(r.passed) << s.describe() << ": " << (r.violation ? r.violation->reason : "");
    }
  }
}
