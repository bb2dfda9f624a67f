#include "explicable/simulation.hpp"

#include <cmath>

#include "explicable/csv.hpp"
#include "explicable/error.hpp"
#include "explicable/lemmas.hpp"
#include "explicable/loss.hpp"

namespace explicable {

void SimConfig::validate() const {
  for (double w : {w_correct, w_c, w_f}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(Errc::invalid_config, "weights must be finite and >= 0");
  }
  if (!(p_f_step > 0.0 && p_f_step < 0.5)) throw Error(Errc::invalid_config, "p_f_step must lie in (0, 0.5)");
  if (epsilon && *epsilon != p_f_step) {
    throw Error(Errc::invalid_config, "epsilon must equal p_f_step for adjacent-pair comparison");
  }
  if (p_true_grid.empty()) throw Error(Errc::invalid_config, "p_true grid is empty");
  for (double p : p_true_grid) {
    if (!(p > 0.0 && p < 1.0)) throw Error(Errc::invalid_config, "p_true values must lie in (0, 1)");
  }
}

std::string classify_regime(const SimConfig& config) {
  if (config.regime_label) return *config.regime_label;
  const double cut = kExplicableFraction * config.w_correct;
  const bool c_expl = config.w_c >= cut;
  const bool f_expl = config.w_f >= cut;
  if (c_expl && f_expl) return "both-explicable";
  if (!c_expl && !f_expl) return "both-inexplicable";
  return "explicable-vs-inexplicable";
}

std::vector<LossCurve> sweep(const SimConfig& config) {
  config.validate();
  const std::vector<double> row{config.w_correct, config.w_c, config.w_f};
  const auto label = classify_regime(config);
  std::vector<LossCurve> curves;
  for (double p_true : config.p_true_grid) {
    const double rest = 1.0 - p_true;
    // Interior points k * step for k = 1..K keep p_c >= step.
    const auto steps = static_cast<long long>(std::floor(rest / config.p_f_step + 1e-9));
    if (steps < 3) {
      throw Error(Errc::infeasible_grid, "p_true=" + csv::format_double(p_true) +
                                             " leaves no room for two interior points");
    }
    LossCurve curve{p_true, {}, label};
    for (long long k = 1; k < steps; ++k) {
      const double p_f = static_cast<double>(k) * config.p_f_step;
      const double p_c = rest - p_f;
      const std::vector<double> p{p_true, p_c, p_f};
      curve.points.push_back({p_f, p_c, weighted_log_loss(row, p), -std::log(p_true)});
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

RegimeVerdict regime_report(std::span<const LossCurve> curves, const SimConfig& config) {
  RegimeVerdict v;
  v.regime = classify_regime(config);
  const double eps = config.epsilon.value_or(config.p_f_step);
  for (const auto& curve : curves) {
    for (std::size_t k = 0; k + 1 < curve.points.size(); ++k) {
      const auto& lo = curve.points[k];
      const auto& hi = curve.points[k + 1];
      // Moving eps from c to f: class a = c keeps p_a = hi.p_c, class b = f
      // starts from p_b = lo.p_f.
      const double tau = lemma2_tau(hi.p_c, lo.p_f, eps);
      const double margin = config.w_c - tau * config.w_f;
      const bool holds = margin > 0.0;
      const bool increases = hi.loss_weighted > lo.loss_weighted;
      ++v.pairs;
      if (holds) ++v.condition_holds;
      if (!increases) {
        ++v.violations;
        if (holds) ++v.violations_where_condition_holds;
      }
      if (std::abs(margin) <= kLemmaBoundaryBand) {
        ++v.boundary;
      } else if (increases != holds) {
        ++v.disagreements;
      }

      const double exact_margin = config.w_c - config.w_f / tau;
      const bool exact_holds = exact_margin > 0.0;
      if (exact_holds) ++v.exact_condition_holds;
      if (exact_holds && !increases) ++v.violations_where_exact_condition_holds;
      if (std::abs(exact_margin) <= kLemmaBoundaryBand) {
        ++v.exact_boundary;
      } else if (increases != exact_holds) {
        ++v.exact_disagreements;
      }
    }
  }
  v.monotone_overall = v.violations == 0;
  v.condition_consistent = v.disagreements == 0;
  v.exact_condition_consistent = v.exact_disagreements == 0;

  if (curves.size() >= 2) {
    auto mean = [](const LossCurve& c, bool weighted) {
      double s = 0.0;
      for (const auto& p : c.points) s += weighted ? p.loss_weighted : p.loss_cce;
      return s / static_cast<double>(c.points.size());
    };
    // Curves follow the grid order; pick its extremes.
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 1; i < curves.size(); ++i) {
      if (curves[i].p_true < curves[lo].p_true) lo = i;
      if (curves[i].p_true > curves[hi].p_true) hi = i;
    }
    v.weighted_correct_sensitivity = mean(curves[lo], true) - mean(curves[hi], true);
    v.cce_correct_sensitivity = mean(curves[lo], false) - mean(curves[hi], false);
  }
  return v;
}

std::string curve_csv_header() { return "regime,p_true,p_f,p_c,loss_weighted,loss_cce\n"; }

std::string write_curve_rows(std::span<const LossCurve> curves) {
  std::string out;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out += c.regime_label + "," + csv::format_double(c.p_true) + "," + csv::format_double(p.p_f) + "," +
             csv::format_double(p.p_c) + "," + csv::format_double(p.loss_weighted) + "," +
             csv::format_double(p.loss_cce) + "\n";
    }
  }
  return out;
}

std::string verdict_csv_header() { return "regime,monotone_overall,condition_consistent,violations\n"; }

std::string write_verdict_row(const RegimeVerdict& v) {
  return v.regime + "," + (v.monotone_overall ? "true" : "false") + "," +
         (v.condition_consistent ? "true" : "false") + "," + std::to_string(v.violations) + "\n";
}

}  // namespace explicable
