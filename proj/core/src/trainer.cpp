#include "explicable/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "explicable/csv.hpp"
#include "explicable/error.hpp"

namespace explicable {

Dataset::Dataset(std::size_t dims, std::vector<double> features, std::vector<std::size_t> labels,
                 std::vector<std::string> class_names)
    : dims_(dims), features_(std::move(features)), labels_(std::move(labels)), names_(std::move(class_names)) {
  if (labels_.empty()) throw Error(Errc::empty_input, "dataset has no rows");
  if (dims_ == 0) throw Error(Errc::dimension_mismatch, "dataset has no features");
  if (names_.empty()) throw Error(Errc::class_mismatch, "dataset has no classes");
  if (features_.size() != labels_.size() * dims_) {
    throw Error(Errc::dimension_mismatch, "feature buffer is not m*d");
  }
  for (double x : features_) {
    if (!std::isfinite(x)) throw Error(Errc::domain_violation, "non-finite feature");
  }
  for (auto y : labels_) {
    if (y >= names_.size()) throw Error(Errc::index_out_of_range, "label " + std::to_string(y));
  }
}

namespace {

std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("class_" + std::to_string(i));
  return names;
}

// 53-bit uniform in [0, 1) straight from the engine, so parameter
// initialization does not depend on the standard library's distributions.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
  const std::size_t n = spec.centers.size();
  if (n == 0) throw Error(Errc::shape_mismatch, "no class centers");
  const std::size_t d = spec.centers.front().size();
  if (d == 0) throw Error(Errc::shape_mismatch, "zero-dimensional centers");
  for (const auto& c : spec.centers) {
    if (c.size() != d) throw Error(Errc::shape_mismatch, "centers differ in dimension");
  }
  if (!(spec.spread >= 0.0) || !std::isfinite(spec.spread)) {
    throw Error(Errc::invalid_config, "spread must be finite and non-negative");
  }
  if (spec.per_class == 0) throw Error(Errc::invalid_config, "per_class must be positive");
  auto names = spec.class_names.empty() ? default_names(n) : spec.class_names;
  if (names.size() != n) throw Error(Errc::shape_mismatch, "class_names and centers differ in length");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> features;
  std::vector<std::size_t> labels;
  features.reserve(n * spec.per_class * d);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t k = 0; k < spec.per_class; ++k) {
      for (std::size_t j = 0; j < d; ++j) features.push_back(spec.centers[c][j] + spec.spread * noise(rng));
      labels.push_back(c);
    }
  }
  return Dataset(d, std::move(features), std::move(labels), std::move(names));
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(Errc::invalid_config, "learning_rate must be positive");
  }
  if (epochs == 0) throw Error(Errc::invalid_config, "epochs must be positive");
  if (batch_size == 0) throw Error(Errc::invalid_config, "batch_size must be positive");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw Error(Errc::invalid_config, "l2 must be non-negative");
}

Model::Model(std::size_t input_dim, std::size_t hidden_units, std::vector<std::string> class_names)
    : input_dim_(input_dim), hidden_(hidden_units), names_(std::move(class_names)) {
  if (input_dim_ == 0 || names_.empty()) throw Error(Errc::dimension_mismatch, "empty model shape");
  const std::size_t n = names_.size();
  const std::size_t count =
      hidden_ == 0 ? input_dim_ * n + n : input_dim_ * hidden_ + hidden_ + hidden_ * n + n;
  params_.assign(count, 0.0);
}

namespace {

// Views into a flat parameter (or gradient) buffer.
template <typename T>
struct Layers {
  std::span<T> w1, b1, w2, b2;
};

template <typename T>
Layers<T> split(std::span<T> all, std::size_t d, std::size_t h, std::size_t n) {
  if (h == 0) return {all.subspan(0, d * n), all.subspan(d * n, n), {}, {}};
  std::size_t off = 0;
  Layers<T> l;
  l.w1 = all.subspan(off, d * h); off += d * h;
  l.b1 = all.subspan(off, h); off += h;
  l.w2 = all.subspan(off, h * n); off += h * n;
  l.b2 = all.subspan(off, n);
  return l;
}

// out = b + x^T W for W stored in-major (rows = inputs).
void affine(std::span<const double> x, std::span<const double> w, std::span<const double> b,
            std::span<double> out) {
  const std::size_t cols = b.size();
  for (std::size_t j = 0; j < cols; ++j) out[j] = b[j];
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    for (std::size_t j = 0; j < cols; ++j) out[j] += xi * w[i * cols + j];
  }
}

struct Forward {
  std::vector<double> hidden;  // post-tanh activations (empty for linear)
  std::vector<double> logits;
};

Forward forward(const Model& m, std::span<const double> x) {
  auto l = split(std::span<const double>(m.parameters()), m.input_dim(), m.hidden_units(), m.num_classes());
  Forward f;
  f.logits.resize(m.num_classes());
  if (m.hidden_units() == 0) {
    affine(x, l.w1, l.b1, f.logits);
  } else {
    f.hidden.resize(m.hidden_units());
    affine(x, l.w1, l.b1, f.hidden);
    for (auto& a : f.hidden) a = std::tanh(a);
    affine(f.hidden, l.w2, l.b2, f.logits);
  }
  return f;
}

}  // namespace

std::vector<double> Model::logits(std::span<const double> x) const {
  if (x.size() != input_dim_) {
    throw Error(Errc::dimension_mismatch, "expected " + std::to_string(input_dim_) + " features, got " +
                                              std::to_string(x.size()));
  }
  return forward(*this, x).logits;
}

ProbVector predict(const Model& model, std::span<const double> features) {
  return softmax(model.logits(features));
}

class Trainer {
 public:
  Trainer(const Dataset& data, const std::optional<WeightMatrix>& weights, const TrainConfig& cfg)
      : data_(data), weights_(weights), cfg_(cfg),
        model_(data.dims(), cfg.hidden_units, data.class_names()) {}

  TrainResult run() {
    std::mt19937_64 rng(cfg_.seed);
    for (auto& p : model_.params_) p = -0.05 + 0.1 * unit_uniform(rng);
    zero_biases();

    std::vector<std::size_t> order(data_.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(model_.params_.size());
    std::vector<double> dlogits(model_.num_classes());
    std::vector<double> dhidden(model_.hidden_units());
    std::vector<double> trace;
    trace.reserve(cfg_.epochs);

    for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
      // Fisher-Yates with the engine directly keeps shuffles portable.
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
      for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
        const std::size_t stop = std::min(order.size(), start + cfg_.batch_size);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t k = start; k < stop; ++k) accumulate(order[k], grad, dlogits, dhidden);
        step(grad, static_cast<double>(stop - start));
      }
      const double loss = mean_loss();
      if (!std::isfinite(loss)) {
        throw Error(Errc::divergence, "non-finite training loss at epoch " + std::to_string(epoch + 1));
      }
      trace.push_back(loss);
    }
    return {std::move(model_), std::move(trace)};
  }

 private:
  void zero_biases() {
    auto l = split(std::span<double>(model_.params_), model_.input_dim(), model_.hidden_units(),
                   model_.num_classes());
    std::fill(l.b1.begin(), l.b1.end(), 0.0);
    std::fill(l.b2.begin(), l.b2.end(), 0.0);
  }

  double example_loss(std::size_t y, const ProbVector& p) const {
    return weights_ ? weighted_cce(weights_->row(y), p) : categorical_cross_entropy(y, p);
  }

  double mean_loss() const {
    double total = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      total += example_loss(data_.label(i), softmax(forward(model_, data_.features(i)).logits));
    }
    return total / static_cast<double>(data_.size());
  }

  void accumulate(std::size_t i, std::vector<double>& grad, std::vector<double>& dlogits,
                  std::vector<double>& dhidden) const {
    const auto x = data_.features(i);
    const std::size_t y = data_.label(i);
    const auto f = forward(model_, x);
    const auto p = softmax(f.logits);
    if (weights_) {
      weighted_cce_grad_from_probs(weights_->row(y), p.values(), dlogits);
    } else {
      cce_grad_from_probs(y, p.values(), dlogits);
    }

    const std::size_t n = model_.num_classes();
    auto g = split(std::span<double>(grad), model_.input_dim(), model_.hidden_units(), n);
    if (model_.hidden_units() == 0) {
      for (std::size_t a = 0; a < x.size(); ++a) {
        for (std::size_t j = 0; j < n; ++j) g.w1[a * n + j] += x[a] * dlogits[j];
      }
      for (std::size_t j = 0; j < n; ++j) g.b1[j] += dlogits[j];
      return;
    }

    auto l = split(std::span<const double>(model_.params_), model_.input_dim(), model_.hidden_units(), n);
    const std::size_t h = model_.hidden_units();
    for (std::size_t u = 0; u < h; ++u) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        g.w2[u * n + j] += f.hidden[u] * dlogits[j];
        s += l.w2[u * n + j] * dlogits[j];
      }
      dhidden[u] = s * (1.0 - f.hidden[u] * f.hidden[u]);
    }
    for (std::size_t j = 0; j < n; ++j) g.b2[j] += dlogits[j];
    for (std::size_t a = 0; a < x.size(); ++a) {
      for (std::size_t u = 0; u < h; ++u) g.w1[a * h + u] += x[a] * dhidden[u];
    }
    for (std::size_t u = 0; u < h; ++u) g.b1[u] += dhidden[u];
  }

  void step(std::vector<double>& grad, double batch) {
    const std::size_t n = model_.num_classes();
    auto p = split(std::span<double>(model_.params_), model_.input_dim(), model_.hidden_units(), n);
    auto g = split(std::span<double>(grad), model_.input_dim(), model_.hidden_units(), n);
    for (auto& v : grad) v /= batch;
    if (cfg_.l2 > 0.0) {
      for (std::size_t k = 0; k < p.w1.size(); ++k) g.w1[k] += cfg_.l2 * p.w1[k];
      for (std::size_t k = 0; k < p.w2.size(); ++k) g.w2[k] += cfg_.l2 * p.w2[k];
    }
    for (std::size_t k = 0; k < grad.size(); ++k) model_.params_[k] -= cfg_.learning_rate * grad[k];
  }

  const Dataset& data_;
  const std::optional<WeightMatrix>& weights_;
  TrainConfig cfg_;
  Model model_;
};

TrainResult train(const Dataset& data, const std::optional<WeightMatrix>& weights, const TrainConfig& cfg) {
  cfg.validate();
  if (weights && weights->class_names() != data.class_names()) {
    throw Error(Errc::class_mismatch, "weight matrix classes differ from dataset classes");
  }
  return Trainer(data, weights, cfg).run();
}

std::vector<std::size_t> confusion(const Model& model, const Dataset& data) {
  const std::size_t n = model.num_classes();
  if (data.num_classes() != n) throw Error(Errc::class_mismatch, "model and dataset class counts differ");
  std::vector<std::size_t> counts(n * n, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    ++counts[data.label(i) * n + predict(model, data.features(i)).argmax()];
  }
  return counts;
}

double accuracy(const Model& model, const Dataset& data) {
  const auto c = confusion(model, data);
  const std::size_t n = model.num_classes();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) correct += c[i * n + i];
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// --- file formats ---------------------------------------------------------

Dataset read_dataset_csv(std::string_view text, std::optional<std::vector<std::string>> class_names) {
  auto lines = csv::parse(text);
  if (lines.empty()) throw Error(Errc::empty_input, "dataset file is empty", 1);
  const auto& h = lines.front().fields;
  if (h.size() < 2 || h.back() != "label") {
    throw Error(Errc::malformed_input, "expected header 'f_0,...,f_{d-1},label'", lines.front().number);
  }
  const std::size_t d = h.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (h[j] != "f_" + std::to_string(j)) {
      throw Error(Errc::malformed_input, "expected column f_" + std::to_string(j), lines.front().number);
    }
  }
  std::vector<double> features;
  std::vector<std::size_t> labels;
  std::size_t max_label = 0;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.fields.size() != d + 1) throw Error(Errc::malformed_input, "row width", l.number);
    for (std::size_t j = 0; j < d; ++j) features.push_back(csv::parse_double(l.fields[j], l.number));
    labels.push_back(csv::parse_index(l.fields[d], l.number));
    max_label = std::max(max_label, labels.back());
    if (class_names && labels.back() >= class_names->size()) {
      throw Error(Errc::index_out_of_range, "label " + l.fields[d] + " exceeds class count", l.number);
    }
  }
  auto names = class_names ? std::move(*class_names) : default_names(max_label + 1);
  return Dataset(d, std::move(features), std::move(labels), std::move(names));
}

std::string write_dataset_csv(const Dataset& data) {
  std::string out;
  for (std::size_t j = 0; j < data.dims(); ++j) out += "f_" + std::to_string(j) + ",";
  out += "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double x : data.features(i)) out += csv::format_double(x) + ",";
    out += std::to_string(data.label(i)) + "\n";
  }
  return out;
}

namespace {
constexpr std::string_view kModelMagic = "explicable-model";
constexpr int kModelVersion = 1;
}  // namespace

std::string write_model(const Model& model) {
  std::string out = std::string(kModelMagic) + " " + std::to_string(kModelVersion) + "\n";
  out += std::to_string(model.input_dim()) + " " + std::to_string(model.hidden_units()) + " " +
         std::to_string(model.num_classes()) + "\n";
  out += csv::join(model.class_names()) + "\n";
  for (double p : model.parameters()) out += csv::format_double(p) + "\n";
  return out;
}

Model read_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kModelMagic) {
    throw Error(Errc::malformed_input, "not a model file", 1);
  }
  if (version != kModelVersion) {
    throw Error(Errc::malformed_input, "unsupported model version " + std::to_string(version), 1);
  }
  std::size_t d = 0, h = 0, n = 0;
  if (!(in >> d >> h >> n)) throw Error(Errc::malformed_input, "bad dimension line", 2);
  std::string names_line;
  in >> std::ws;
  std::getline(in, names_line);
  auto names = csv::split(names_line);
  if (names.size() != n) throw Error(Errc::malformed_input, "class name count differs from header", 3);
  Model m(d, h, std::move(names));
  for (auto& p : m.parameters()) {
    std::string tok;
    if (!(in >> tok)) throw Error(Errc::malformed_input, "truncated parameter list");
    p = csv::parse_double(tok, 0);
    if (!std::isfinite(p)) throw Error(Errc::malformed_input, "non-finite parameter");
  }
  std::string extra;
  if (in >> extra) throw Error(Errc::malformed_input, "trailing data after parameters");
  return m;
}

}  // namespace explicable
