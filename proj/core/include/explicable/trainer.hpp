#ifndef EXPLICABLE_TRAINER_HPP_
#define EXPLICABLE_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "explicable/loss.hpp"
#include "explicable/weights.hpp"

namespace explicable {

/// m labelled points in d dimensions. Features are row-major m*d.
class Dataset {
 public:
  Dataset(std::size_t dims, std::vector<double> features, std::vector<std::size_t> labels,
          std::vector<std::string> class_names);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t num_classes() const noexcept { return names_.size(); }
  std::span<const double> features(std::size_t i) const {
    return std::span<const double>(features_).subspan(i * dims_, dims_);
  }
  std::size_t label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& class_names() const noexcept { return names_; }

  bool operator==(const Dataset&) const = default;

 private:
  std::size_t dims_;
  std::vector<double> features_;
  std::vector<std::size_t> labels_;
  std::vector<std::string> names_;
};

struct SyntheticSpec {
  std::size_t per_class = 100;
  std::vector<std::vector<double>> centers;  // one point per class
  double spread = 1.0;                       // isotropic standard deviation
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;      // optional; defaults to class_<i>
};

/// Gaussian blobs around `centers`, class-major order. Deterministic in seed.
/// A spread of exactly 0 places every point on its center.
Dataset generate_synthetic(const SyntheticSpec& spec);

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t hidden_units = 0;  // 0 = linear softmax regression
  double l2 = 0.0;

  void validate() const;
};

/// Linear softmax regression, or one tanh hidden layer followed by a linear
/// softmax layer. Weight matrices are stored input-major (row = input unit).
class Model {
 public:
  Model(std::size_t input_dim, std::size_t hidden_units, std::vector<std::string> class_names);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t hidden_units() const noexcept { return hidden_; }
  std::size_t num_classes() const noexcept { return names_.size(); }
  const std::vector<std::string>& class_names() const noexcept { return names_; }

  /// All parameters in serialization order: w1, b1, then w2, b2 if hidden.
  const std::vector<double>& parameters() const noexcept { return params_; }
  std::vector<double>& parameters() noexcept { return params_; }

  std::vector<double> logits(std::span<const double> x) const;

  bool operator==(const Model&) const = default;

 private:
  friend class Trainer;

  std::size_t input_dim_;
  std::size_t hidden_;
  std::vector<std::string> names_;
  std::vector<double> params_;
};

struct TrainResult {
  Model model;
  /// Mean training loss over the full dataset after each epoch.
  std::vector<double> loss_trace;
};

/// Mini-batch SGD on the mean weighted CCE. With `weights` empty the loss is
/// vanilla categorical cross-entropy through its own gradient path.
/// Throws class-mismatch, invalid-config, divergence.
TrainResult train(const Dataset& data, const std::optional<WeightMatrix>& weights,
                  const TrainConfig& cfg);

/// Throws dimension-mismatch.
ProbVector predict(const Model& model, std::span<const double> features);

/// counts[i * n + j]: instances of true class i predicted as j.
std::vector<std::size_t> confusion(const Model& model, const Dataset& data);

double accuracy(const Model& model, const Dataset& data);

// --- file formats ---------------------------------------------------------

/// Header `f_0,...,f_{d-1},label`. Class names default to class_<i> over the
/// largest label seen unless supplied.
Dataset read_dataset_csv(std::string_view text,
                         std::optional<std::vector<std::string>> class_names = std::nullopt);
std::string write_dataset_csv(const Dataset& data);

std::string write_model(const Model& model);
Model read_model(std::string_view text);

}  // namespace explicable

#endif  // EXPLICABLE_TRAINER_HPP_
