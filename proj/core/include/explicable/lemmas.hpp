#ifndef EXPLICABLE_LEMMAS_HPP_
#define EXPLICABLE_LEMMAS_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "explicable/loss.hpp"

// Executable checks of the two ordering guarantees of the weighted loss:
// swapping confidence between an explicable and an inexplicable class, and
// moving epsilon of confidence from class a to class b. Weight rows here may
// be unnormalized; only relative weights matter.
namespace explicable {

/// Width of the band around w_a == tau * w_b reported as a boundary case.
inline constexpr double kLemmaBoundaryBand = 1e-9;

struct SwapResult {
  double loss_explicable;    // high probability on the explicable class
  double loss_inexplicable;  // probabilities swapped
  double difference;         // (log l - log h) * (w_ce - w_ci)
  double direct_difference;  // loss_explicable - loss_inexplicable
};

/// Requires 0 < l < h < 1 and non-negative weights; throws
/// Error(domain-violation) / Error(negative-weight) otherwise. The returned
/// `difference` is computed in the factored form and `direct_difference`
/// by subtracting the two losses; they agree to rounding.
SwapResult lemma1_check(double w_ce, double w_ci, double h, double l);

/// log((p_a + eps) / p_a) / log((p_b + eps) / p_b).
/// Requires p_a, p_b > 0, eps > 0, p_a + eps <= 1, p_b + eps <= 1.
double lemma2_tau(double p_a, double p_b, double epsilon);

/// One epsilon-shift scenario. `base_probs` carries p_a at class_a and p_b
/// at class_b; every other entry is held fixed across both scenarios so
/// their contribution cancels.
struct LemmaTrial {
  std::vector<double> weight_row;
  ProbVector base_probs;
  std::size_t class_a;
  std::size_t class_b;
  double epsilon;
};

struct ShiftResult {
  double loss_high;  // p_a at a, p_b + eps at b
  double loss_low;   // p_a + eps at a, p_b at b
  double tau;
  bool penalized;    // loss_high > loss_low, by direct evaluation

  // Stated contract: penalized <=> w_a > tau * w_b.
  bool boundary;     // |w_a - tau * w_b| <= kLemmaBoundaryBand
  bool consistent;   // boundary, or the contract holds for this trial

  // The loss difference is w_a * log((p_a+eps)/p_a) - w_b * log((p_b+eps)/p_b),
  // so the exact break-even ratio is 1 / tau. The tau condition implies
  // penalization only when tau >= 1, i.e. p_a <= p_b.
  double exact_threshold;   // log((p_b+eps)/p_b) / log((p_a+eps)/p_a)
  bool exact_boundary;      // |w_a - exact_threshold * w_b| within the band
  bool exact_consistent;    // penalized <=> w_a > exact_threshold * w_b
  bool sufficient_holds;    // w_a > tau * w_b (off boundary) implies penalized
};

/// Throws Error(invariant-violation) if the trial is malformed.
ShiftResult lemma2_check(const LemmaTrial& trial);

struct SuiteSummary {
  std::size_t pass = 0;
  std::size_t fail = 0;
  std::size_t boundary = 0;  // counted in pass as well
  /// Largest |factored - direct| seen (swap suite only).
  double max_form_gap = 0.0;

  // Shift suite only: the same trials judged against the exact threshold,
  // and the one-directional reading restricted to trials with p_a < p_b.
  std::size_t exact_pass = 0;
  std::size_t exact_fail = 0;
  std::size_t exact_boundary = 0;
  std::size_t sufficient_trials = 0;
  std::size_t sufficient_fail = 0;
};

/// Seeded random swap tuples with w_ce > w_ci >= 0 and 0 < l < h < 1. A
/// trial passes when the difference is negative and both computations
/// agree within 1e-12.
SuiteSummary run_lemma1_suite(std::size_t trials, std::uint64_t seed);

/// Seeded random LemmaTrials over 2..8 classes. pass/fail count the stated
/// contract (penalized <=> w_a > tau * w_b).
SuiteSummary run_lemma2_suite(std::size_t trials, std::uint64_t seed);

}  // namespace explicable

#endif  // EXPLICABLE_LEMMAS_HPP_
