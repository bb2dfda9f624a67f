#ifndef EXPLICABLE_METRICS_HPP_
#define EXPLICABLE_METRICS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "explicable/loss.hpp"
#include "explicable/weights.hpp"

namespace explicable {

struct PredictionRow {
  std::string instance_id;
  std::size_t true_class;
  ProbVector probs;
};

/// One classifier's outputs over a test set. Instance ids are unique.
class PredictionSet {
 public:
  PredictionSet(std::string classifier_name, std::vector<PredictionRow> rows);

  const std::string& classifier_name() const noexcept { return name_; }
  const std::vector<PredictionRow>& rows() const noexcept { return rows_; }
  std::size_t num_classes() const noexcept { return rows_.empty() ? 0 : rows_.front().probs.size(); }

 private:
  std::string name_;
  std::vector<PredictionRow> rows_;
};

/// An instance that every compared classifier got wrong.
struct Misprediction {
  std::string instance_id;
  std::size_t true_class;
  std::vector<std::size_t> predicted;  // one per classifier, in input order
};

/// Instances misclassified by every set, ordered by instance id.
/// Throws instance-coverage-mismatch, true-class-disagreement.
std::vector<Misprediction> misclassified_intersection(std::span<const PredictionSet> sets);

/// v[c] = sim(true, predicted_c). Throws index-out-of-range.
std::vector<double> similarity_of_mistakes(const Misprediction& m, const WeightMatrix& sim);

/// Hard and Soft explicability scores. Soft credit is kept exactly as an
/// integer count of 1/soft_denominator units so that the per-instance unit
/// of credit is conserved without rounding.
struct ScoreReport {
  std::vector<std::string> classifier_names;
  std::vector<std::size_t> hard;
  std::vector<double> soft;
  std::vector<long long> soft_units;
  long long soft_denominator = 1;  // lcm(1..number of classifiers)
  std::size_t intersection_size = 0;
  std::size_t tied_instances = 0;  // instances whose maximum is shared
};

/// A hard point goes to a classifier only when its similarity is the strict
/// maximum; ties award no hard point. Each of the k classifiers sharing the
/// maximum receives 1/k soft credit.
ScoreReport hard_soft_scores(std::span<const Misprediction> mistakes, const WeightMatrix& sim,
                             std::vector<std::string> classifier_names);

/// misclassified_intersection followed by hard_soft_scores.
ScoreReport score_classifiers(std::span<const PredictionSet> sets, const WeightMatrix& sim);

/// Rows are classifiers, columns are named weighted losses; each cell is the
/// mean weighted CCE over the classifier's instances, accumulated in
/// instance-id order.
struct LossTable {
  std::vector<std::string> models;
  std::vector<std::string> losses;
  std::vector<double> values;  // row-major models x losses

  double operator()(std::size_t model, std::size_t loss) const { return values[model * losses.size() + loss]; }
};

/// Throws class-mismatch.
LossTable loss_table(std::span<const PredictionSet> sets,
                     std::span<const std::pair<std::string, WeightMatrix>> losses);

// --- file formats ---------------------------------------------------------

/// `instance,true_class,p_0..p_{n-1}`.
std::string write_predictions_csv(const PredictionSet& set);
PredictionSet read_predictions_csv(std::string classifier_name, std::string_view text);

/// `classifier,hard,soft`.
std::string write_score_csv(const ScoreReport& r);
/// Header `model,<loss names...>`.
std::string write_loss_table_csv(const LossTable& t);

}  // namespace explicable

#endif  // EXPLICABLE_METRICS_HPP_
