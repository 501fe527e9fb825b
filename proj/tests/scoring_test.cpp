#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "subscan/rng.hpp"
#include "subscan/scoring.hpp"

namespace subscan {
namespace {

TEST(OptimalQTest, NullCaseIsOne) {
  EXPECT_EQ(optimal_q(10, 100, 0.1), 1.0);
  EXPECT_EQ(optimal_q(0, 50, 0.2), 1.0);
  EXPECT_EQ(optimal_q(3, 100, 0.1), 1.0);
}

TEST(OptimalQTest, MatchesNumericMaximizer) {
  const auto numeric = oracle::numeric_llr_max(5, 10, 0.1);
  EXPECT_NEAR(numeric.q, 9.0, 1e-6);
  EXPECT_NEAR(optimal_q(5, 10, 0.1), numeric.q, 1e-6);
  EXPECT_DOUBLE_EQ(optimal_q(5, 10, 0.1), 9.0);
}

TEST(OptimalQTest, AllPositiveDiverges) { EXPECT_TRUE(std::isinf(optimal_q(7, 7, 0.3))); }

TEST(OptimalQTest, ContractErrors) {
  EXPECT_THROW(optimal_q(1, 2, 0.0), ContractError);
  EXPECT_THROW(optimal_q(1, 2, 1.0), ContractError);
  EXPECT_THROW(optimal_q(3, 2, 0.5), ContractError);
  EXPECT_THROW(optimal_q(0, 0, 0.5), ContractError);
  EXPECT_THROW(bernoulli_score(1, 2, -0.1), ContractError);
}

TEST(BernoulliScoreTest, WorkedExample) {
  const auto numeric = oracle::numeric_llr_max(5, 10, 0.1);
  const auto p = bernoulli_score(5, 10, 0.1);
  EXPECT_NEAR(p.score, numeric.value, 1e-9);
  EXPECT_NEAR(p.score, 5.0 * std::log(9.0) - 10.0 * std::log(1.8), 1e-12);
  EXPECT_NEAR(p.score, 5.1082, 1e-4);
  EXPECT_EQ(p.n_subset, 10u);
  EXPECT_EQ(p.n_positive, 5u);
  EXPECT_DOUBLE_EQ(p.subset_mean, 0.5);
}

TEST(BernoulliScoreTest, WholeDatasetScoresZero) {
  const auto p = bernoulli_score(39, 1000, 0.039);
  EXPECT_EQ(p.score, 0.0);
  EXPECT_EQ(p.q_mle, 1.0);
}

TEST(BernoulliScoreTest, AllPositiveUsesLimit) {
  const auto p = bernoulli_score(4, 4, 0.25);
  EXPECT_TRUE(p.q_unbounded());
  EXPECT_DOUBLE_EQ(p.score, -4.0 * std::log(0.25));
  // The finite-q objective approaches the limit from below.
  EXPECT_LT(oracle::llr_objective(1e9, 4, 4, 0.25), p.score);
  EXPECT_NEAR(oracle::llr_objective(1e9, 4, 4, 0.25), p.score, 1e-6);
}

// Closed-form q* and score agree with numeric maximization on random inputs.
TEST(BernoulliScoreProperty, ClosedFormIsOptimal) {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng.below(5000);
    const std::size_t c = rng.below(n);  // c < n keeps q finite
    const double mu = 0.001 + 0.998 * rng.uniform();
    const auto p = bernoulli_score(c, n, mu);
    // Keep the search interval wide enough to contain q*.
    const double q_max = std::max(1e6, 10.0 * p.q_mle);
    const auto numeric = oracle::numeric_llr_max(c, n, mu, q_max);
    EXPECT_LE(std::abs(p.q_mle - numeric.q), 1e-6 * std::max(1.0, numeric.q)) << c << "/" << n << " mu " << mu;
    EXPECT_LE(std::abs(p.score - numeric.value), 1e-6 * std::max(1.0, std::abs(numeric.value)));
    EXPECT_EQ(p.score == 0.0, p.q_mle == 1.0);
  }
}

TEST(BernoulliScoreProperty, ZeroAtOrBelowBaseline) {
  for (std::size_t n = 1; n < 200; n += 7) {
    for (std::size_t c = 0; c <= n; ++c) {
      const double mu = 0.3;
      if (static_cast<double>(c) / static_cast<double>(n) <= mu) {
        EXPECT_EQ(bernoulli_score(c, n, mu).score, 0.0);
      }
    }
  }
}

TEST(BernoulliScoreProperty, NondecreasingInPositives) {
  for (double mu : {0.01, 0.1, 0.5, 0.9}) {
    for (std::size_t n : {1u, 10u, 137u, 1000u}) {
      double prev = 0.0;
      for (std::size_t c = 0; c <= n; ++c) {
        const double s = bernoulli_score(c, n, mu).score;
        EXPECT_GE(s, prev);
        prev = s;
      }
    }
  }
}

// Two disjoint subsets with identical rates score like one subset with summed counts.
TEST(BernoulliScoreProperty, UnionOfEqualRateSubsets) {
  const auto a = bernoulli_score(12, 40, 0.1);
  const auto merged = bernoulli_score(12 + 24, 40 + 80, 0.1);
  const auto direct = bernoulli_score(36, 120, 0.1);
  EXPECT_DOUBLE_EQ(merged.score, direct.score);
  EXPECT_DOUBLE_EQ(a.q_mle, merged.q_mle);
  EXPECT_NEAR(merged.score, 3.0 * a.score, 1e-9);
}

TEST(OddsRatioTest, EqualOddsGiveOne) {
  const auto e = odds_ratio(10, 40, 30, 120);
  EXPECT_DOUBLE_EQ(e.odds_ratio, 1.0);
  EXPECT_LT(e.ci_low, 1.0);
  EXPECT_GT(e.ci_high, 1.0);
  EXPECT_FALSE(e.continuity_corrected);
}

TEST(OddsRatioTest, HandArithmetic) {
  const auto e = odds_ratio(20, 80, 10, 890);
  EXPECT_NEAR(e.odds_ratio, (20.0 / 80.0) / (10.0 / 890.0), 1e-12);
  EXPECT_NEAR(e.odds_ratio, 22.25, 1e-12);
  const double se = std::sqrt(1.0 / 20 + 1.0 / 80 + 1.0 / 10 + 1.0 / 890);
  EXPECT_NEAR(e.ci_low, 22.25 * std::exp(-1.96 * se), 1e-9);
  EXPECT_NEAR(e.ci_high, 22.25 * std::exp(1.96 * se), 1e-9);
  EXPECT_DOUBLE_EQ(e.subset_rate, 0.2);
  EXPECT_DOUBLE_EQ(e.complement_rate, 10.0 / 900.0);
}

TEST(OddsRatioTest, ZeroCellsAreCorrected) {
  const auto e = odds_ratio(5, 0, 3, 10);
  EXPECT_TRUE(e.continuity_corrected);
  EXPECT_NEAR(e.odds_ratio, (5.5 / 0.5) / (3.5 / 10.5), 1e-12);
  EXPECT_LE(e.ci_low, e.odds_ratio);
  EXPECT_GE(e.ci_high, e.odds_ratio);
}

TEST(OddsRatioTest, EmptySidesRejected) {
  EXPECT_THROW(odds_ratio(0, 0, 1, 1), ContractError);
  EXPECT_THROW(odds_ratio(1, 1, 0, 0), ContractError);
}

}  // namespace
}  // namespace subscan
