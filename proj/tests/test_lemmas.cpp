#include "explicable/lemmas.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "explicable/error.hpp"

using namespace explicable;

TEST(Lemma1, WorkedExample) {
  auto r = lemma1_check(0.4, 0.05, 0.7, 0.2);
  // (ln 0.2 - ln 0.7) * 0.35
  EXPECT_NEAR(r.difference, -0.4384670389733787, 1e-12);
  EXPECT_NEAR(r.direct_difference, r.difference, 1e-12);
  EXPECT_LT(r.difference, 0.0);
  EXPECT_NEAR(r.loss_explicable, -(0.4 * std::log(0.7) + 0.05 * std::log(0.2)), 1e-15);
}

TEST(Lemma1, EqualWeightsMakeSwapFree) {
  auto r = lemma1_check(0.3, 0.3, 0.9, 0.05);
  EXPECT_EQ(r.difference, 0.0);
}

TEST(Lemma1, DomainViolations) {
  EXPECT_THROW(lemma1_check(0.4, 0.05, 0.2, 0.7), Error);
  EXPECT_THROW(lemma1_check(0.4, 0.05, 0.5, 0.5), Error);
  EXPECT_THROW(lemma1_check(0.4, 0.05, 1.0, 0.5), Error);
  EXPECT_THROW(lemma1_check(0.4, 0.05, 0.5, 0.0), Error);
  EXPECT_THROW(lemma1_check(-0.4, 0.05, 0.5, 0.1), Error);
}

TEST(Lemma1, RandomSwapsAlwaysPenalizeInexplicable) {
  auto s = run_lemma1_suite(10000, 42);
  EXPECT_EQ(s.pass, 10000u);
  EXPECT_EQ(s.fail, 0u);
  EXPECT_LE(s.max_form_gap, 1e-12);
}

TEST(Lemma2Tau, Examples) {
  // ln(1.5) / ln(1.2)
  EXPECT_NEAR(lemma2_tau(0.2, 0.5, 0.1), 2.223901085741545, 1e-12);
  EXPECT_EQ(lemma2_tau(0.3, 0.3, 0.2), 1.0);
  const double small = lemma2_tau(0.2, 0.5, 1e-8);
  EXPECT_NEAR(small / (0.5 / 0.2), 1.0, 1e-5);
}

TEST(Lemma2Tau, ExceedsOneWhenPaBelowPb) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int k = 0; k < 1000; ++k) {
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const double eps = (1.0 - b) * u(rng);
    if (eps <= 0.0) continue;
    EXPECT_GT(lemma2_tau(a, b, eps), 1.0);
  }
}

TEST(Lemma2Tau, DomainViolations) {
  EXPECT_THROW(lemma2_tau(0.0, 0.5, 0.1), Error);
  EXPECT_THROW(lemma2_tau(0.2, 0.5, 0.0), Error);
  EXPECT_THROW(lemma2_tau(0.2, 0.95, 0.1), Error);
}

TEST(Lemma2Check, WorkedExample) {
  LemmaTrial t{{1.0, 0.4, 0.05}, ProbVector({0.3, 0.2, 0.5}), 1, 2, 0.1};
  auto r = lemma2_check(t);
  EXPECT_NEAR(r.tau, 2.223901085741545, 1e-12);
  EXPECT_TRUE(r.penalized);
  EXPECT_TRUE(r.consistent);
  EXPECT_FALSE(r.boundary);
  // Direct evaluation of the two scenarios, by hand.
  EXPECT_NEAR(r.loss_high, 1.8732892504878758, 1e-12);
  EXPECT_NEAR(r.loss_low, 1.7202192850843079, 1e-12);
  EXPECT_NEAR(r.loss_high - r.loss_low, 0.4 * std::log(1.5) - 0.05 * std::log(1.2), 1e-12);
}

TEST(Lemma2Check, WeightsOnTheStatedThresholdAreReportedAsBoundary) {
  const double tau = lemma2_tau(0.2, 0.5, 0.1);
  LemmaTrial t{{1.0, tau * 0.05, 0.05}, ProbVector({0.3, 0.2, 0.5}), 1, 2, 0.1};
  auto r = lemma2_check(t);
  EXPECT_TRUE(r.boundary);
  EXPECT_TRUE(r.consistent);
  // The losses only break even at the exact ratio, not at tau.
  EXPECT_FALSE(r.exact_boundary);
  EXPECT_TRUE(r.penalized);
}

TEST(Lemma2Check, LossesBreakEvenAtExactThreshold) {
  const double exact = std::log(1.2) / std::log(1.5);
  LemmaTrial t{{1.0, exact * 0.05, 0.05}, ProbVector({0.3, 0.2, 0.5}), 1, 2, 0.1};
  auto r = lemma2_check(t);
  EXPECT_NEAR(r.exact_threshold, exact, 1e-15);
  EXPECT_NEAR(r.exact_threshold * r.tau, 1.0, 1e-15);
  EXPECT_TRUE(r.exact_boundary);
  EXPECT_NEAR(r.loss_high, r.loss_low, 1e-9);
}

// w_a = 0.1 sits between w_b / tau = 0.0225 and tau * w_b = 0.111: the
// shift is penalized although the stated condition does not hold.
TEST(Lemma2Check, StatedConditionIsSufficientNotNecessary) {
  LemmaTrial t{{1.0, 0.1, 0.05}, ProbVector({0.3, 0.2, 0.5}), 1, 2, 0.1};
  auto r = lemma2_check(t);
  EXPECT_NEAR(r.loss_high - r.loss_low, 0.1 * std::log(1.5) - 0.05 * std::log(1.2), 1e-12);
  EXPECT_TRUE(r.penalized);
  EXPECT_FALSE(r.consistent);
  EXPECT_TRUE(r.exact_consistent);
  EXPECT_TRUE(r.sufficient_holds);
}

TEST(Lemma2Check, NotPenalizedBelowExactThreshold) {
  LemmaTrial t{{1.0, 0.01, 0.05}, ProbVector({0.3, 0.2, 0.5}), 1, 2, 0.1};
  auto r = lemma2_check(t);
  EXPECT_FALSE(r.penalized);
  EXPECT_TRUE(r.consistent);
  EXPECT_TRUE(r.exact_consistent);
}

TEST(Lemma2Check, InvariantViolations) {
  auto expect_violation = [](LemmaTrial t) {
    try {
      lemma2_check(t);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invariant_violation);
    }
  };
  expect_violation({{1, 0.4, 0.05}, ProbVector({0.3, 0.2, 0.5}), 1, 1, 0.1});
  expect_violation({{1, 0.4, 0.05}, ProbVector({0.3, 0.2, 0.5}), 1, 2, 0.6});
  expect_violation({{1, 0.4}, ProbVector({0.3, 0.2, 0.5}), 0, 1, 0.1});
  expect_violation({{1, 0.4, 0.05}, ProbVector({0.5, 0.0, 0.5}), 1, 2, 0.1});
}

TEST(Lemma2Check, RandomTrialsAgreeWithExactThreshold) {
  auto s = run_lemma2_suite(10000, 7);
  EXPECT_EQ(s.exact_fail, 0u);
  EXPECT_EQ(s.exact_pass, 10000u);
  EXPECT_GT(s.sufficient_trials, 4000u);
  EXPECT_EQ(s.sufficient_fail, 0u);
  // The two-sided reading of the tau condition has counterexamples.
  EXPECT_GT(s.fail, 0u);
  EXPECT_EQ(s.pass + s.fail, 10000u);
}
