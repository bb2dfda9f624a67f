#include "explicable/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "explicable/error.hpp"

namespace explicable {

ProbVector::ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw Error(Errc::domain_violation, "empty probability vector");
  double s = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(Errc::domain_violation, "probability " + std::to_string(p) + " outside [0, 1]");
    }
    s += p;
  }
  if (std::abs(s - 1.0) > kSimplexTolerance) {
    throw Error(Errc::domain_violation, "probabilities sum to " + std::to_string(s));
  }
}

std::size_t ProbVector::argmax() const {
  return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

LogitVector::LogitVector(std::vector<double> logits) : logits_(std::move(logits)) {
  if (logits_.empty()) throw Error(Errc::domain_violation, "empty logit vector");
  for (double z : logits_) {
    if (!std::isfinite(z)) throw Error(Errc::domain_violation, "non-finite logit");
  }
}

ProbVector softmax(std::span<const double> logits) {
  if (logits.empty()) throw Error(Errc::domain_violation, "empty logit vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double s = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    p[j] = std::exp(logits[j] - m);
    s += p[j];
  }
  for (auto& v : p) v /= s;
  return ProbVector(ProbVector::Unchecked{}, std::move(p));
}

double weighted_log_loss(std::span<const double> w_row, std::span<const double> p) {
  if (w_row.size() != p.size()) {
    throw Error(Errc::dimension_mismatch, "weight row has " + std::to_string(w_row.size()) +
                                              " entries, probabilities " + std::to_string(p.size()));
  }
  double loss = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double w = w_row[j];
    if (w < 0.0) throw Error(Errc::negative_weight, "weight " + std::to_string(w) + " at class " + std::to_string(j));
    if (w == 0.0) continue;
    loss -= w * std::log(std::max(p[j], kProbabilityFloor));
  }
  return loss;
}

double weighted_cce(std::span<const double> w_row, const ProbVector& p) {
  return weighted_log_loss(w_row, p.values());
}

double categorical_cross_entropy(std::size_t label, const ProbVector& p) {
  if (label >= p.size()) throw Error(Errc::index_out_of_range, "label " + std::to_string(label));
  return -std::log(std::max(p[label], kProbabilityFloor));
}

void weighted_cce_grad_from_probs(std::span<const double> w_row, std::span<const double> p,
                                  std::span<double> grad) {
  if (w_row.size() != p.size() || grad.size() != p.size()) {
    throw Error(Errc::dimension_mismatch, "gradient operands differ in length");
  }
  double total = 0.0;
  for (double w : w_row) {
    if (w < 0.0) throw Error(Errc::negative_weight, "weight " + std::to_string(w));
    total += w;
  }
  for (std::size_t j = 0; j < p.size(); ++j) grad[j] = p[j] * total - w_row[j];
}

std::vector<double> weighted_cce_grad(std::span<const double> w_row, const LogitVector& z) {
  auto p = softmax(z);
  std::vector<double> g(z.size());
  weighted_cce_grad_from_probs(w_row, p.values(), g);
  return g;
}

void cce_grad_from_probs(std::size_t label, std::span<const double> p, std::span<double> grad) {
  if (label >= p.size() || grad.size() != p.size()) {
    throw Error(Errc::dimension_mismatch, "gradient operands differ in length");
  }
  for (std::size_t j = 0; j < p.size(); ++j) grad[j] = p[j];
  grad[label] -= 1.0;
}

}  // namespace explicable
