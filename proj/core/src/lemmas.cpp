#include "explicable/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "explicable/error.hpp"

namespace explicable {

SwapResult lemma1_check(double w_ce, double w_ci, double h, double l) {
  if (!(l > 0.0 && l < h && h < 1.0)) {
    throw Error(Errc::domain_violation, "requires 0 < l < h < 1, got l=" + std::to_string(l) +
                                            " h=" + std::to_string(h));
  }
  if (!(w_ce >= 0.0 && w_ci >= 0.0)) throw Error(Errc::negative_weight, "swap weights must be >= 0");
  SwapResult r{};
  r.loss_explicable = -w_ce * std::log(h) - w_ci * std::log(l);
  r.loss_inexplicable = -w_ce * std::log(l) - w_ci * std::log(h);
  r.difference = (std::log(l) - std::log(h)) * (w_ce - w_ci);
  r.direct_difference = r.loss_explicable - r.loss_inexplicable;
  return r;
}

double lemma2_tau(double p_a, double p_b, double epsilon) {
  if (!(p_a > 0.0 && p_b > 0.0 && epsilon > 0.0 && p_a + epsilon <= 1.0 && p_b + epsilon <= 1.0)) {
    throw Error(Errc::domain_violation, "tau requires p_a, p_b, eps > 0 and p + eps <= 1");
  }
  if (p_a == p_b) return 1.0;
  // log1p keeps precision when eps is tiny relative to p.
  return std::log1p(epsilon / p_a) / std::log1p(epsilon / p_b);
}

ShiftResult lemma2_check(const LemmaTrial& t) {
  const std::size_t n = t.base_probs.size();
  if (t.weight_row.size() != n) throw Error(Errc::invariant_violation, "weight row length differs from probabilities");
  if (t.class_a >= n || t.class_b >= n || t.class_a == t.class_b) {
    throw Error(Errc::invariant_violation, "class_a and class_b must be distinct valid indices");
  }
  const double p_a = t.base_probs[t.class_a];
  const double p_b = t.base_probs[t.class_b];
  if (!(t.epsilon > 0.0) || p_a <= 0.0 || p_b <= 0.0 || p_a + t.epsilon > 1.0 || p_b + t.epsilon > 1.0) {
    throw Error(Errc::invariant_violation, "need p_a, p_b > 0, eps > 0 and p + eps <= 1");
  }
  for (double w : t.weight_row) {
    if (!(w >= 0.0)) throw Error(Errc::invariant_violation, "weights must be non-negative");
  }

  std::vector<double> high(t.base_probs.values().begin(), t.base_probs.values().end());
  std::vector<double> low = high;
  high[t.class_b] = p_b + t.epsilon;
  low[t.class_a] = p_a + t.epsilon;

  ShiftResult r{};
  r.loss_high = weighted_log_loss(t.weight_row, high);
  r.loss_low = weighted_log_loss(t.weight_row, low);
  r.tau = lemma2_tau(p_a, p_b, t.epsilon);
  r.penalized = r.loss_high > r.loss_low;
  const double w_a = t.weight_row[t.class_a];
  const double w_b = t.weight_row[t.class_b];

  const double margin = w_a - r.tau * w_b;
  r.boundary = std::abs(margin) <= kLemmaBoundaryBand;
  r.consistent = r.boundary || (r.penalized == (margin > 0.0));

  r.exact_threshold = p_a == p_b ? 1.0 : std::log1p(t.epsilon / p_b) / std::log1p(t.epsilon / p_a);
  const double exact_margin = w_a - r.exact_threshold * w_b;
  r.exact_boundary = std::abs(exact_margin) <= kLemmaBoundaryBand;
  r.exact_consistent = r.exact_boundary || (r.penalized == (exact_margin > 0.0));
  r.sufficient_holds = r.boundary || r.exact_boundary || !(margin > 0.0) || r.penalized;
  return r;
}

namespace {

// Uniform on the open interval (lo, hi).
double open_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  double x = u(rng);
  while (x <= lo) x = u(rng);
  return x;
}

}  // namespace

SuiteSummary run_lemma1_suite(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SuiteSummary s;
  for (std::size_t k = 0; k < trials; ++k) {
    double w_ci = open_uniform(rng, 0.0, 1.0);
    double w_ce = open_uniform(rng, 0.0, 1.0);
    if (w_ce < w_ci) std::swap(w_ce, w_ci);
    if (w_ce == w_ci) w_ce = std::nextafter(w_ci, 2.0);
    if (k % 10 == 0) w_ci = 0.0;
    double l = open_uniform(rng, 0.0, 1.0);
    double h = open_uniform(rng, 0.0, 1.0);
    if (h < l) std::swap(h, l);
    if (h == l) h = std::nextafter(l, 1.0);

    const auto r = lemma1_check(w_ce, w_ci, h, l);
    const double gap = std::abs(r.difference - r.direct_difference);
    s.max_form_gap = std::max(s.max_form_gap, gap);
    if (r.difference < 0.0 && gap <= 1e-12) {
      ++s.pass;
    } else {
      ++s.fail;
    }
  }
  return s;
}

SuiteSummary run_lemma2_suite(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> classes(2, 8);
  SuiteSummary s;
  for (std::size_t k = 0; k < trials; ++k) {
    const std::size_t n = classes(rng);
    std::vector<double> w(n), p(n);
    for (auto& x : w) x = open_uniform(rng, 0.0, 1.0);
    double total = 0.0;
    for (auto& x : p) total += (x = open_uniform(rng, 0.0, 1.0));
    for (auto& x : p) x /= total;
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    const double room = 1.0 - std::max(p[a], p[b]);
    const double eps = open_uniform(rng, 0.0, room);

    const bool a_below_b = p[a] < p[b];
    LemmaTrial trial{std::move(w), ProbVector(std::move(p)), a, b, eps};
    const auto r = lemma2_check(trial);
    if (r.boundary) ++s.boundary;
    ++(r.consistent ? s.pass : s.fail);
    if (r.exact_boundary) ++s.exact_boundary;
    ++(r.exact_consistent ? s.exact_pass : s.exact_fail);
    if (a_below_b) {
      ++s.sufficient_trials;
      if (!r.sufficient_holds) ++s.sufficient_fail;
    }
  }
  return s;
}

}  // namespace explicable
