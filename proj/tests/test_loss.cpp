#include "explicable/loss.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "explicable/error.hpp"
#include "oracles.hpp"

using namespace explicable;

TEST(Softmax, Examples) {
  auto u = softmax(LogitVector({0, 0, 0}));
  for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(u[j], 1.0 / 3.0);

  auto big = softmax(LogitVector({1000, 0, 0}));
  EXPECT_NEAR(big[0], 1.0, 1e-300);
  EXPECT_GE(big[1], 0.0);
  EXPECT_LT(big[1], 1e-300);
  EXPECT_TRUE(std::isfinite(big[0]));

  auto two = softmax(LogitVector({std::log(2.0), 0}));
  EXPECT_NEAR(two[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(two[1], 1.0 / 3.0, 1e-15);
}

TEST(Softmax, ShiftInvariant) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> z(2 + rng() % 8);
    for (auto& v : z) v = g(rng);
    auto shifted = z;
    const double c = g(rng) * 10;
    for (auto& v : shifted) v += c;
    auto a = softmax(z);
    auto b = softmax(shifted);
    double sum = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      EXPECT_NEAR(a[j], b[j], 1e-12);
      sum += a[j];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(LogitVector, RejectsNonFinite) {
  EXPECT_THROW(LogitVector({0.0, std::nan("")}), Error);
  EXPECT_THROW(LogitVector({INFINITY}), Error);
}

TEST(ProbVector, Validation) {
  EXPECT_THROW(ProbVector({0.5, 0.6}), Error);
  EXPECT_THROW(ProbVector({1.2, -0.2}), Error);
  EXPECT_NO_THROW(ProbVector({0.5, 0.5}));
  EXPECT_EQ(ProbVector({0.4, 0.4, 0.2}).argmax(), 0u);
}

TEST(WeightedCce, Examples) {
  EXPECT_LE(weighted_cce(std::vector<double>{1, 0, 0}, ProbVector({1 - 2e-13, 1e-13, 1e-13})), 1e-9);
  // -(ln 0.7 + 0.4 ln 0.2 + 0.05 ln 0.1), evaluated by hand.
  EXPECT_NEAR(weighted_cce(std::vector<double>{1, 0.4, 0.05}, ProbVector({0.7, 0.2, 0.1})), 1.115579363562075,
              1e-12);
  // The swap pair, over the two incorrect classes only.
  EXPECT_NEAR(weighted_log_loss(std::vector<double>{0.4, 0.05}, std::vector<double>{0.7, 0.2}),
              0.22314187319719803, 1e-12);
  EXPECT_NEAR(weighted_log_loss(std::vector<double>{0.4, 0.05}, std::vector<double>{0.2, 0.7}),
              0.6616089121705768, 1e-12);
}

TEST(WeightedCce, ZeroWeightIgnoresZeroProbability) {
  const double loss = weighted_cce(std::vector<double>{1, 0}, ProbVector({1.0, 0.0}));
  EXPECT_EQ(loss, 0.0);
  // A weighted zero probability is clipped, not infinite.
  const double clipped = weighted_cce(std::vector<double>{0, 1}, ProbVector({1.0, 0.0}));
  EXPECT_NEAR(clipped, -std::log(kProbabilityFloor), 1e-9);
}

TEST(WeightedCce, Errors) {
  try {
    weighted_cce(std::vector<double>{1, -0.1}, ProbVector({0.5, 0.5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::negative_weight);
  }
  EXPECT_THROW(weighted_cce(std::vector<double>{1, 0, 0}, ProbVector({0.5, 0.5})), Error);
}

TEST(WeightedCce, OneHotReducesToCce) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 2 + rng() % 9;
    std::vector<double> z(n);
    for (auto& v : z) v = g(rng);
    auto p = softmax(z);
    const std::size_t y = rng() % n;
    std::vector<double> w(n, 0.0);
    w[y] = 1.0;
    EXPECT_NEAR(weighted_cce(w, p), categorical_cross_entropy(y, p), 1e-12);
  }
}

TEST(WeightedCceGrad, Examples) {
  auto g = weighted_cce_grad(std::vector<double>{1, 0, 0}, LogitVector({0, 0, 0}));
  EXPECT_NEAR(g[0], -2.0 / 3.0, 1e-15);
  EXPECT_NEAR(g[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(g[2], 1.0 / 3.0, 1e-15);

  std::vector<double> w{0.6, 0.3, 0.1};
  std::vector<double> z;
  for (double x : w) z.push_back(std::log(x));
  for (double v : weighted_cce_grad(w, LogitVector(z))) EXPECT_NEAR(v, 0.0, 1e-15);

  EXPECT_THROW(weighted_cce_grad(std::vector<double>{-1, 0}, LogitVector({0, 0})), Error);
}

// Analytic gradient against central finite differences of the loss composed
// with the textbook softmax.
TEST(WeightedCceGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.5);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + trial % 9;
    std::vector<double> w(n), z(n);
    for (auto& v : w) v = u(rng);
    if (trial % 2 == 0) {
      double s = 0.0;
      for (double v : w) s += v;
      for (auto& v : w) v /= s;
    }
    for (auto& v : z) v = g(rng);
    auto analytic = weighted_cce_grad(w, LogitVector(z));
    auto fd = oracle::central_difference(
        [&](const std::vector<double>& x) { return oracle::naive_weighted_cce_of_logits(w, x); }, z, 1e-6);
    double diff = 0.0, na = 0.0, nf = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      diff += (analytic[j] - fd[j]) * (analytic[j] - fd[j]);
      na += analytic[j] * analytic[j];
      nf += fd[j] * fd[j];
    }
    const double rel = std::sqrt(diff) / std::max(std::sqrt(std::max(na, nf)), 1e-300);
    worst = std::max(worst, rel);
  }
  EXPECT_LT(worst, 1e-5);
}

// For a strictly positive normalized row, the soft target is the unique
// minimizer over the simplex.
TEST(WeightedCce, SoftTargetIsMinimizer) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& v : w) s += (v = u(rng));
    for (auto& v : w) v /= s;
    const double at_target = weighted_log_loss(w, w);
    for (int k = 0; k < 50; ++k) {
      // Random direction projected onto the simplex's tangent space.
      std::vector<double> d(n);
      double mean = 0.0;
      for (auto& v : d) mean += (v = u(rng) - 0.5);
      mean /= static_cast<double>(n);
      for (auto& v : d) v -= mean;
      double scale = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (d[j] < 0) scale = std::min(scale, -0.9 * w[j] / d[j]);
      }
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = w[j] + scale * d[j] * u(rng) / 1.0;
      double ps = 0.0;
      for (double v : p) ps += v;
      for (auto& v : p) v /= ps;
      bool same = true;
      for (std::size_t j = 0; j < n; ++j) same = same && std::abs(p[j] - w[j]) < 1e-9;
      if (same) continue;
      EXPECT_GT(weighted_log_loss(w, p), at_target);
    }
  }
}

TEST(CceGrad, MatchesWeightedPathWithIdentityRowBitwise) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 2 + rng() % 8;
    std::vector<double> z(n);
    for (auto& v : z) v = g(rng);
    auto p = softmax(z);
    const std::size_t y = rng() % n;
    std::vector<double> w(n, 0.0);
    w[y] = 1.0;
    std::vector<double> a(n), b(n);
    weighted_cce_grad_from_probs(w, p.values(), a);
    cce_grad_from_probs(y, p.values(), b);
    EXPECT_EQ(a, b);
  }
}
