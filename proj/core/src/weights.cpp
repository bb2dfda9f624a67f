#include "explicable/weights.hpp"

#include <cmath>
#include <map>
#include <set>

#include "explicable/csv.hpp"
#include "explicable/error.hpp"
#include "explicable/taxonomy.hpp"

namespace explicable {

namespace {

bool rows_normalized(const std::vector<double>& v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += v[i * n + j];
    if (std::abs(s - 1.0) > kNormalizedTolerance) return false;
  }
  return true;
}

void check_names(const std::vector<std::string>& names) {
  if (names.empty()) throw Error(Errc::empty_list, "weight matrix needs at least one class");
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty() || n.find_first_of(",\n\r") != std::string::npos) {
      throw Error(Errc::malformed_input, "invalid class name '" + n + "'");
    }
    if (!seen.insert(n).second) throw Error(Errc::malformed_input, "duplicate class name " + n);
  }
}

}  // namespace

WeightMatrix::WeightMatrix(std::vector<std::string> class_names, std::vector<double> values)
    : names_(std::move(class_names)), values_(std::move(values)) {
  check_names(names_);
  const std::size_t n = names_.size();
  if (values_.size() != n * n) {
    throw Error(Errc::shape_mismatch, "expected " + std::to_string(n * n) + " entries, got " +
                                          std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double diag = values_[i * n + i];
    for (std::size_t j = 0; j < n; ++j) {
      const double w = values_[i * n + j];
      if (!std::isfinite(w) || w < 0.0) {
        throw Error(Errc::invariant_violation, "entry (" + names_[i] + ", " + names_[j] +
                                                   ") must be finite and non-negative");
      }
      if (j != i && !(w < diag)) {
        throw Error(Errc::invariant_violation,
                    "diagonal of row " + names_[i] + " is not the strict row maximum (column " +
                        names_[j] + ")");
      }
    }
  }
  normalized_ = rows_normalized(values_, n);
}

WeightMatrix WeightMatrix::identity(std::vector<std::string> class_names) {
  const std::size_t n = class_names.size();
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return WeightMatrix(std::move(class_names), std::move(v));
}

WeightMatrix normalize_rows(const WeightMatrix& m) {
  const std::size_t n = m.size();
  std::vector<double> v = m.values();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += v[i * n + j];
    if (!(s > 0.0)) throw Error(Errc::zero_row, "row " + m.class_names()[i] + " sums to zero");
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] /= s;
  }
  return WeightMatrix(m.class_names(), std::move(v));
}

WeightMatrix from_instance_ratings(std::span<const InstanceRating> ratings,
                                   std::vector<std::string> class_names,
                                   InstanceAggregation mode) {
  const std::size_t n = class_names.size();
  std::vector<double> sums(n * n, 0.0);
  std::vector<std::size_t> instances(n, 0);
  for (const auto& r : ratings) {
    if (r.true_class >= n) {
      throw Error(Errc::index_out_of_range, "instance " + r.instance_id + " has true class " +
                                                std::to_string(r.true_class) + " but n=" +
                                                std::to_string(n));
    }
    if (r.label_counts.size() != n) {
      throw Error(Errc::index_out_of_range, "instance " + r.instance_id + " has " +
                                                std::to_string(r.label_counts.size()) +
                                                " counts, expected " + std::to_string(n));
    }
    long long total = 0;
    for (auto c : r.label_counts) {
      if (c < 0) throw Error(Errc::invariant_violation, "negative count in " + r.instance_id);
      total += c;
    }
    if (total == 0) throw Error(Errc::invariant_violation, "instance " + r.instance_id + " has no votes");
    const double scale = mode == InstanceAggregation::pooled_counts ? 1.0 : 1.0 / static_cast<double>(total);
    for (std::size_t j = 0; j < n; ++j) {
      sums[r.true_class * n + j] += static_cast<double>(r.label_counts[j]) * scale;
    }
    ++instances[r.true_class];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (instances[i] == 0) {
      throw Error(Errc::class_with_no_instances, "class " + class_names[i] + " has no instances");
    }
  }
  // Per-instance averaging divides by the instance count, which row
  // normalization does anyway.
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += sums[i * n + j];
    for (std::size_t j = 0; j < n; ++j) sums[i * n + j] /= s;
  }
  return WeightMatrix(std::move(class_names), std::move(sums));
}

WeightMatrix class_ratings_raw(std::span<const RatingRecord> ratings,
                               std::vector<std::string> class_names) {
  const std::size_t n = class_names.size();
  // Integer sums keep the result independent of rating order.
  std::vector<long long> score_sum(n * n, 0);
  std::vector<long long> count(n * n, 0);
  for (const auto& r : ratings) {
    if (r.true_class >= n || r.predicted_class >= n) {
      throw Error(Errc::index_out_of_range, "rating by " + r.rater_id + " references class outside 0.." +
                                                std::to_string(n - 1));
    }
    if (r.true_class == r.predicted_class) {
      throw Error(Errc::invariant_violation, "rating by " + r.rater_id + " is on the diagonal");
    }
    if (r.score < 0 || r.score > kMaxLikertScore) {
      throw Error(Errc::score_out_of_range, "score " + std::to_string(r.score) + " by " + r.rater_id);
    }
    score_sum[r.true_class * n + r.predicted_class] += r.score;
    ++count[r.true_class * n + r.predicted_class];
  }
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        v[i * n + j] = 1.0;
        continue;
      }
      const auto c = count[i * n + j];
      if (c == 0) {
        throw Error(Errc::missing_pair, "no rating for (" + class_names[i] + " -> " + class_names[j] + ")");
      }
      v[i * n + j] = static_cast<double>(score_sum[i * n + j]) /
                     (static_cast<double>(c) * static_cast<double>(kMaxLikertScore));
    }
  }
  return WeightMatrix(std::move(class_names), std::move(v));
}

WeightMatrix from_class_ratings(std::span<const RatingRecord> ratings,
                                std::vector<std::string> class_names) {
  return normalize_rows(class_ratings_raw(ratings, std::move(class_names)));
}

WeightMatrix taxonomy_similarity_raw(const Taxonomy& tax, const LabelMap& labels) {
  labels.validate_against(tax);
  const std::size_t n = labels.size();
  std::vector<Taxonomy::NodeId> nodes;
  for (const auto& e : labels.entries()) nodes.push_back(tax.id(e.node));
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] = tax.path_similarity(nodes[i], nodes[j]);
  }
  return WeightMatrix(labels.class_names(), std::move(v));
}

WeightMatrix from_taxonomy(const Taxonomy& tax, const LabelMap& labels) {
  return normalize_rows(taxonomy_similarity_raw(tax, labels));
}

WeightMatrix average_matrices(std::span<const WeightMatrix> ms) {
  if (ms.empty()) throw Error(Errc::empty_list, "nothing to average");
  const auto& first = ms.front();
  std::vector<double> acc(first.values().size(), 0.0);
  for (const auto& m : ms) {
    if (m.size() != first.size()) {
      throw Error(Errc::shape_mismatch, "matrices of size " + std::to_string(first.size()) +
                                            " and " + std::to_string(m.size()));
    }
    if (m.class_names() != first.class_names()) {
      throw Error(Errc::class_order_mismatch, "class names or order differ between matrices");
    }
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += m.values()[k];
  }
  for (auto& a : acc) a /= static_cast<double>(ms.size());
  return normalize_rows(WeightMatrix(first.class_names(), std::move(acc)));
}

// --- file formats ---------------------------------------------------------

std::string write_weight_csv(const WeightMatrix& m) {
  std::string out;
  for (const auto& n : m.class_names()) out += "," + n;
  out += '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += m.class_names()[i];
    for (double w : m.row(i)) out += "," + csv::format_double(w);
    out += '\n';
  }
  return out;
}

WeightMatrix read_weight_csv(std::string_view text) {
  auto lines = csv::parse(text);
  if (lines.empty()) throw Error(Errc::empty_input, "weight matrix file is empty", 1);
  const auto& header = lines.front();
  if (header.fields.size() < 2 || !header.fields[0].empty()) {
    throw Error(Errc::malformed_input, "header must be ',name_0,...'", header.number);
  }
  std::vector<std::string> names(header.fields.begin() + 1, header.fields.end());
  const std::size_t n = names.size();
  if (lines.size() != n + 1) {
    throw Error(Errc::shape_mismatch, "expected " + std::to_string(n) + " rows, got " +
                                          std::to_string(lines.size() - 1), lines.back().number);
  }
  std::vector<double> values;
  values.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = lines[i + 1];
    if (l.fields.size() != n + 1) throw Error(Errc::shape_mismatch, "row width", l.number);
    if (l.fields[0] != names[i]) {
      throw Error(Errc::class_order_mismatch, "row label " + l.fields[0] + " != column " + names[i], l.number);
    }
    for (std::size_t j = 0; j < n; ++j) values.push_back(csv::parse_double(l.fields[j + 1], l.number));
  }
  return WeightMatrix(std::move(names), std::move(values));
}

std::vector<InstanceRating> read_instance_ratings_csv(std::string_view text) {
  auto lines = csv::parse(text);
  if (lines.empty()) throw Error(Errc::empty_input, "IHL file is empty", 1);
  const auto& h = lines.front().fields;
  if (h.size() < 3 || h[0] != "instance_id" || h[1] != "true_class") {
    throw Error(Errc::malformed_input, "expected header 'instance_id,true_class,count_0,...'", lines.front().number);
  }
  for (std::size_t j = 2; j < h.size(); ++j) {
    if (h[j] != "count_" + std::to_string(j - 2)) {
      throw Error(Errc::malformed_input, "expected column count_" + std::to_string(j - 2), lines.front().number);
    }
  }
  const std::size_t n = h.size() - 2;
  std::vector<InstanceRating> out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.fields.size() != n + 2) throw Error(Errc::malformed_input, "row width", l.number);
    InstanceRating r{l.fields[0], csv::parse_index(l.fields[1], l.number), {}};
    for (std::size_t j = 0; j < n; ++j) r.label_counts.push_back(csv::parse_int(l.fields[j + 2], l.number));
    out.push_back(std::move(r));
  }
  return out;
}

std::string write_instance_ratings_csv(std::span<const InstanceRating> ratings, std::size_t n) {
  std::string out = "instance_id,true_class";
  for (std::size_t j = 0; j < n; ++j) out += ",count_" + std::to_string(j);
  out += '\n';
  for (const auto& r : ratings) {
    out += r.instance_id + "," + std::to_string(r.true_class);
    for (auto c : r.label_counts) out += "," + std::to_string(c);
    out += '\n';
  }
  return out;
}

std::string class_ratings_csv_header() { return "rater_id,true_class,predicted_class,score\n"; }

std::string class_rating_csv_line(const RatingRecord& r) {
  return r.rater_id + "," + std::to_string(r.true_class) + "," + std::to_string(r.predicted_class) +
         "," + std::to_string(r.score) + "\n";
}

std::vector<RatingRecord> read_class_ratings_csv(std::string_view text) {
  auto lines = csv::parse(text);
  if (lines.empty()) throw Error(Errc::empty_input, "CHL file is empty", 1);
  if (lines.front().fields != std::vector<std::string>{"rater_id", "true_class", "predicted_class", "score"}) {
    throw Error(Errc::malformed_input, "expected header 'rater_id,true_class,predicted_class,score'",
                lines.front().number);
  }
  std::vector<RatingRecord> out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.fields.size() != 4) throw Error(Errc::malformed_input, "expected 4 fields", l.number);
    auto score = csv::parse_int(l.fields[3], l.number);
    if (score < 0 || score > kMaxLikertScore) {
      throw Error(Errc::score_out_of_range, "score " + l.fields[3], l.number);
    }
    out.push_back({l.fields[0], csv::parse_index(l.fields[1], l.number),
                   csv::parse_index(l.fields[2], l.number), static_cast<int>(score)});
  }
  return out;
}

std::vector<std::string> read_class_names_csv(std::string_view text) {
  auto lines = csv::parse(text);
  if (lines.empty()) throw Error(Errc::empty_input, "class list is empty", 1);
  const auto& h = lines.front().fields;
  const bool ok = (h.size() == 2 || h.size() == 3) && h[0] == "index" && h[1] == "name" &&
                  (h.size() == 2 || h[2] == "node");
  if (!ok) throw Error(Errc::malformed_input, "expected header 'index,name[,node]'", lines.front().number);
  std::map<std::size_t, std::string> by_index;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.fields.size() != h.size()) throw Error(Errc::malformed_input, "row width", l.number);
    auto idx = csv::parse_index(l.fields[0], l.number);
    if (!by_index.emplace(idx, l.fields[1]).second) {
      throw Error(Errc::index_out_of_range, "duplicate class index " + l.fields[0], l.number);
    }
  }
  std::vector<std::string> names;
  for (const auto& [idx, name] : by_index) {
    if (idx != names.size()) {
      throw Error(Errc::index_out_of_range, "class indices must be contiguous from 0");
    }
    names.push_back(name);
  }
  if (names.empty()) throw Error(Errc::empty_input, "class list has no rows");
  return names;
}

}  // namespace explicable
