#ifndef EXPLICABLE_WEIGHTS_HPP_
#define EXPLICABLE_WEIGHTS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace explicable {

class Taxonomy;
class LabelMap;

/// Row-sum tolerance under which a matrix counts as row-stochastic.
inline constexpr double kNormalizedTolerance = 1e-9;

/// The n x n penalty/credit matrix. Row i is the true class, column j the
/// predicted class. Entries are finite and non-negative and the diagonal
/// entry is the strict maximum of its row; construction throws
/// Error(invariant-violation) otherwise.
class WeightMatrix {
 public:
  /// `values` is row-major n*n.
  WeightMatrix(std::vector<std::string> class_names, std::vector<double> values);

  static WeightMatrix identity(std::vector<std::string> class_names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& class_names() const noexcept { return names_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * size() + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * size(), size());
  }
  const std::vector<double>& values() const noexcept { return values_; }
  /// True iff every row sums to 1 within kNormalizedTolerance.
  bool normalized() const noexcept { return normalized_; }

  bool operator==(const WeightMatrix&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
  bool normalized_ = false;
};

/// IHL source: one instance's human label votes.
struct InstanceRating {
  std::string instance_id;
  std::size_t true_class;
  std::vector<long long> label_counts;
};

/// CHL source: one rater's 0-4 Likert judgment of a class-pair confusion.
struct RatingRecord {
  std::string rater_id;
  std::size_t true_class;
  std::size_t predicted_class;
  int score;

  bool operator==(const RatingRecord&) const = default;
};

inline constexpr int kMaxLikertScore = 4;

enum class InstanceAggregation {
  pooled_counts,         // sum raw votes per class, then normalize the row
  per_instance_average,  // normalize each instance, then average per class
};

WeightMatrix normalize_rows(const WeightMatrix& m);

/// Throws class-with-no-instances, index-out-of-range.
WeightMatrix from_instance_ratings(std::span<const InstanceRating> ratings,
                                   std::vector<std::string> class_names,
                                   InstanceAggregation mode = InstanceAggregation::pooled_counts);

/// Off-diagonal entries are mean(score)/4 with the diagonal fixed at 1
/// before row normalization. Throws missing-pair, score-out-of-range.
WeightMatrix class_ratings_raw(std::span<const RatingRecord> ratings,
                               std::vector<std::string> class_names);
WeightMatrix from_class_ratings(std::span<const RatingRecord> ratings,
                                std::vector<std::string> class_names);

/// Entry (i, j) is the path similarity of the nodes bound to classes i and j.
WeightMatrix taxonomy_similarity_raw(const Taxonomy& tax, const LabelMap& labels);
WeightMatrix from_taxonomy(const Taxonomy& tax, const LabelMap& labels);

/// Element-wise mean, then row-normalized.
WeightMatrix average_matrices(std::span<const WeightMatrix> ms);

// --- file formats ---------------------------------------------------------

/// `,name_0,...` header then `name_i,w_i0,...` rows.
std::string write_weight_csv(const WeightMatrix& m);
WeightMatrix read_weight_csv(std::string_view text);

/// `instance_id,true_class,count_0..count_{n-1}`. n is taken from the header.
std::vector<InstanceRating> read_instance_ratings_csv(std::string_view text);
std::string write_instance_ratings_csv(std::span<const InstanceRating> ratings, std::size_t n);

/// `rater_id,true_class,predicted_class,score`.
std::vector<RatingRecord> read_class_ratings_csv(std::string_view text);
std::string class_ratings_csv_header();
std::string class_rating_csv_line(const RatingRecord& r);

/// Class list: `index,name` header with an optional trailing `node` column
/// (a LabelMap file is accepted as-is).
std::vector<std::string> read_class_names_csv(std::string_view text);

}  // namespace explicable

#endif  // EXPLICABLE_WEIGHTS_HPP_
