#ifndef EXPLICABLE_LOSS_HPP_
#define EXPLICABLE_LOSS_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace explicable {

/// Probabilities are clipped to this floor before taking logs.
inline constexpr double kProbabilityFloor = 1e-12;
/// Tolerance on the sum of a ProbVector.
inline constexpr double kSimplexTolerance = 1e-9;

/// A distribution over n classes: entries in [0, 1] summing to 1.
class ProbVector {
 public:
  /// Throws Error(domain-violation) when the simplex invariant fails.
  explicit ProbVector(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> values() const noexcept { return probs_; }
  /// Index of the largest entry; lowest index wins exact ties.
  std::size_t argmax() const;

  bool operator==(const ProbVector&) const = default;

 private:
  struct Unchecked {};
  ProbVector(Unchecked, std::vector<double> probs) : probs_(std::move(probs)) {}
  friend ProbVector softmax(std::span<const double> logits);

  std::vector<double> probs_;
};

/// Finite pre-softmax scores.
class LogitVector {
 public:
  /// Throws Error(domain-violation) on non-finite entries.
  explicit LogitVector(std::vector<double> logits);

  std::size_t size() const noexcept { return logits_.size(); }
  double operator[](std::size_t i) const { return logits_[i]; }
  std::span<const double> values() const noexcept { return logits_; }

 private:
  std::vector<double> logits_;
};

/// Max-shifted softmax; never overflows for finite input.
ProbVector softmax(std::span<const double> logits);
inline ProbVector softmax(const LogitVector& z) { return softmax(z.values()); }

/// -sum_j w_j * log(max(p_j, floor)), with 0 * log(p) taken as 0.
/// `p` is not required to sum to one. Throws negative-weight and
/// dimension-mismatch.
double weighted_log_loss(std::span<const double> w_row, std::span<const double> p);

/// Weighted categorical cross-entropy of one example whose true class
/// selects `w_row` from the weight matrix.
double weighted_cce(std::span<const double> w_row, const ProbVector& p);

/// Vanilla categorical cross-entropy, -log(max(p_label, floor)).
double categorical_cross_entropy(std::size_t label, const ProbVector& p);

/// d/dz of weighted_cce(w, softmax(z)): p_j * sum(w) - w_j.
std::vector<double> weighted_cce_grad(std::span<const double> w_row, const LogitVector& z);
/// Same, given p = softmax(z) already. Writes into `grad`.
void weighted_cce_grad_from_probs(std::span<const double> w_row, std::span<const double> p,
                                  std::span<double> grad);

/// d/dz of categorical_cross_entropy: p - onehot(label).
void cce_grad_from_probs(std::size_t label, std::span<const double> p, std::span<double> grad);

}  // namespace explicable

#endif  // EXPLICABLE_LOSS_HPP_
