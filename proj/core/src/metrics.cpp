#include "explicable/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "explicable/csv.hpp"
#include "explicable/error.hpp"

namespace explicable {

PredictionSet::PredictionSet(std::string classifier_name, std::vector<PredictionRow> rows)
    : name_(std::move(classifier_name)), rows_(std::move(rows)) {
  std::set<std::string_view> ids;
  for (const auto& r : rows_) {
    if (!ids.insert(r.instance_id).second) {
      throw Error(Errc::malformed_input, "duplicate instance id " + r.instance_id + " in " + name_);
    }
    if (r.probs.size() != rows_.front().probs.size()) {
      throw Error(Errc::class_mismatch, "rows of " + name_ + " differ in class count");
    }
    if (r.true_class >= r.probs.size()) {
      throw Error(Errc::index_out_of_range, "true class of " + r.instance_id + " out of range");
    }
  }
}

namespace {

std::map<std::string_view, const PredictionRow*> by_id(const PredictionSet& s) {
  std::map<std::string_view, const PredictionRow*> m;
  for (const auto& r : s.rows()) m.emplace(r.instance_id, &r);
  return m;
}

}  // namespace

std::vector<Misprediction> misclassified_intersection(std::span<const PredictionSet> sets) {
  if (sets.empty()) throw Error(Errc::empty_list, "no prediction sets");
  std::vector<std::map<std::string_view, const PredictionRow*>> index;
  for (const auto& s : sets) index.push_back(by_id(s));
  const auto& first = index.front();
  for (std::size_t c = 1; c < index.size(); ++c) {
    if (index[c].size() != first.size() ||
        !std::equal(first.begin(), first.end(), index[c].begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw Error(Errc::instance_coverage_mismatch,
                  sets[c].classifier_name() + " covers different instances than " + sets[0].classifier_name());
    }
  }

  std::vector<Misprediction> out;
  for (const auto& [id, row0] : first) {
    Misprediction m{std::string(id), row0->true_class, {}};
    bool all_wrong = true;
    for (std::size_t c = 0; c < index.size(); ++c) {
      const auto* row = index[c].at(id);
      if (row->true_class != row0->true_class) {
        throw Error(Errc::true_class_disagreement, "instance " + m.instance_id + " has conflicting true classes");
      }
      const auto pred = row->probs.argmax();
      all_wrong = all_wrong && pred != row->true_class;
      m.predicted.push_back(pred);
    }
    if (all_wrong) out.push_back(std::move(m));
  }
  return out;
}

std::vector<double> similarity_of_mistakes(const Misprediction& m, const WeightMatrix& sim) {
  if (m.true_class >= sim.size()) {
    throw Error(Errc::index_out_of_range, "true class " + std::to_string(m.true_class) + " of " + m.instance_id);
  }
  std::vector<double> v;
  v.reserve(m.predicted.size());
  for (auto p : m.predicted) {
    if (p >= sim.size()) throw Error(Errc::index_out_of_range, "predicted class " + std::to_string(p));
    v.push_back(sim(m.true_class, p));
  }
  return v;
}

ScoreReport hard_soft_scores(std::span<const Misprediction> mistakes, const WeightMatrix& sim,
                             std::vector<std::string> classifier_names) {
  const std::size_t k = classifier_names.size();
  if (k == 0) throw Error(Errc::empty_list, "no classifiers to score");
  ScoreReport r;
  r.classifier_names = std::move(classifier_names);
  r.hard.assign(k, 0);
  r.soft_units.assign(k, 0);
  r.soft_denominator = 1;
  for (long long i = 2; i <= static_cast<long long>(k); ++i) r.soft_denominator = std::lcm(r.soft_denominator, i);
  r.intersection_size = mistakes.size();

  for (const auto& m : mistakes) {
    if (m.predicted.size() != k) throw Error(Errc::shape_mismatch, "misprediction " + m.instance_id);
    const auto v = similarity_of_mistakes(m, sim);
    const double best = *std::max_element(v.begin(), v.end());
    const auto winners = static_cast<long long>(std::count(v.begin(), v.end(), best));
    for (std::size_t c = 0; c < k; ++c) {
      if (v[c] != best) continue;
      r.soft_units[c] += r.soft_denominator / winners;
      if (winners == 1) ++r.hard[c];
    }
    if (winners > 1) ++r.tied_instances;
  }
  r.soft.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    r.soft[c] = static_cast<double>(r.soft_units[c]) / static_cast<double>(r.soft_denominator);
  }
  return r;
}

ScoreReport score_classifiers(std::span<const PredictionSet> sets, const WeightMatrix& sim) {
  std::vector<std::string> names;
  for (const auto& s : sets) names.push_back(s.classifier_name());
  const auto m = misclassified_intersection(sets);
  return hard_soft_scores(m, sim, std::move(names));
}

LossTable loss_table(std::span<const PredictionSet> sets,
                     std::span<const std::pair<std::string, WeightMatrix>> losses) {
  LossTable t;
  for (const auto& [name, _] : losses) t.losses.push_back(name);
  for (const auto& s : sets) {
    t.models.push_back(s.classifier_name());
    if (s.rows().empty()) throw Error(Errc::empty_input, s.classifier_name() + " has no predictions");
    for (const auto& [name, w] : losses) {
      if (w.size() != s.num_classes()) {
        throw Error(Errc::class_mismatch, "loss " + name + " has " + std::to_string(w.size()) + " classes, " +
                                              s.classifier_name() + " predicts " + std::to_string(s.num_classes()));
      }
    }
    const auto rows = by_id(s);
    for (const auto& [name, w] : losses) {
      double total = 0.0;
      for (const auto& [id, row] : rows) total += weighted_cce(w.row(row->true_class), row->probs);
      t.values.push_back(total / static_cast<double>(rows.size()));
    }
  }
  return t;
}

// --- file formats ---------------------------------------------------------

std::string write_predictions_csv(const PredictionSet& set) {
  std::string out = "instance,true_class";
  for (std::size_t j = 0; j < set.num_classes(); ++j) out += ",p_" + std::to_string(j);
  out += '\n';
  for (const auto& r : set.rows()) {
    out += r.instance_id + "," + std::to_string(r.true_class);
    for (double p : r.probs.values()) out += "," + csv::format_double(p);
    out += '\n';
  }
  return out;
}

PredictionSet read_predictions_csv(std::string classifier_name, std::string_view text) {
  auto lines = csv::parse(text);
  if (lines.empty()) throw Error(Errc::empty_input, "prediction file is empty", 1);
  const auto& h = lines.front().fields;
  if (h.size() < 3 || h[0] != "instance" || h[1] != "true_class") {
    throw Error(Errc::malformed_input, "expected header 'instance,true_class,p_0,...'", lines.front().number);
  }
  const std::size_t n = h.size() - 2;
  for (std::size_t j = 0; j < n; ++j) {
    if (h[j + 2] != "p_" + std::to_string(j)) {
      throw Error(Errc::malformed_input, "expected column p_" + std::to_string(j), lines.front().number);
    }
  }
  std::vector<PredictionRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.fields.size() != n + 2) throw Error(Errc::malformed_input, "row width", l.number);
    std::vector<double> p;
    for (std::size_t j = 0; j < n; ++j) p.push_back(csv::parse_double(l.fields[j + 2], l.number));
    try {
      rows.push_back({l.fields[0], csv::parse_index(l.fields[1], l.number), ProbVector(std::move(p))});
    } catch (const Error& e) {
      if (e.line()) throw;
      throw Error(e.code(), e.what(), l.number);
    }
  }
  return PredictionSet(std::move(classifier_name), std::move(rows));
}

std::string write_score_csv(const ScoreReport& r) {
  std::string out = "classifier,hard,soft\n";
  for (std::size_t c = 0; c < r.classifier_names.size(); ++c) {
    out += r.classifier_names[c] + "," + std::to_string(r.hard[c]) + "," + csv::format_double(r.soft[c]) + "\n";
  }
  return out;
}

std::string write_loss_table_csv(const LossTable& t) {
  std::string out = "model";
  for (const auto& l : t.losses) out += "," + l;
  out += '\n';
  for (std::size_t m = 0; m < t.models.size(); ++m) {
    out += t.models[m];
    for (std::size_t l = 0; l < t.losses.size(); ++l) out += "," + csv::format_double(t(m, l));
    out += '\n';
  }
  return out;
}

}  // namespace explicable
