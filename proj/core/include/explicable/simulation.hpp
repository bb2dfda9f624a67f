#ifndef EXPLICABLE_SIMULATION_HPP_
#define EXPLICABLE_SIMULATION_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace explicable {

/// Three-class loss landscape: the correct class, a semantically closer
/// class c and a farther class f.
struct SimConfig {
  double w_correct = 1.0;
  double w_c = 0.4;
  double w_f = 0.05;
  std::vector<double> p_true_grid{0.1, 0.3, 0.5, 0.7};
  double p_f_step = 0.01;
  /// Shift size for the threshold condition. Adjacent grid points differ by
  /// p_f_step, so when set it must equal p_f_step.
  std::optional<double> epsilon;
  /// Overrides the label derived by classify_regime.
  std::optional<std::string> regime_label;

  void validate() const;
};

/// Both off-diagonal weights at or above this fraction of w_correct count as
/// explicable; both below as inexplicable.
inline constexpr double kExplicableFraction = 0.25;

/// "explicable-vs-inexplicable", "both-inexplicable" or "both-explicable".
std::string classify_regime(const SimConfig& config);

struct CurvePoint {
  double p_f;
  double p_c;
  double loss_weighted;
  double loss_cce;
};

struct LossCurve {
  double p_true;
  std::vector<CurvePoint> points;  // ascending p_f
  std::string regime_label;
};

/// For every p_true, sweeps p_f from one step up to 1 - p_true - step with
/// p_c taking the remainder. Throws infeasible-grid, invalid-config.
std::vector<LossCurve> sweep(const SimConfig& config);

struct RegimeVerdict {
  std::string regime;
  std::size_t pairs = 0;                 // adjacent grid pairs examined
  std::size_t condition_holds = 0;       // pairs with w_c > tau * w_f
  std::size_t boundary = 0;              // |w_c - tau * w_f| within the band
  std::size_t violations = 0;            // pairs where loss fails to increase
  std::size_t violations_where_condition_holds = 0;
  std::size_t disagreements = 0;         // loss sign != condition, off boundary
  bool monotone_overall = false;         // violations == 0
  bool condition_consistent = false;     // disagreements == 0
  /// The same accounting against the exact break-even ratio 1 / tau.
  std::size_t exact_condition_holds = 0;
  std::size_t exact_boundary = 0;
  std::size_t exact_disagreements = 0;
  std::size_t violations_where_exact_condition_holds = 0;
  bool exact_condition_consistent = false;
  /// Drop in per-curve mean loss from the lowest to the highest p_true.
  double weighted_correct_sensitivity = 0.0;
  double cce_correct_sensitivity = 0.0;
};

RegimeVerdict regime_report(std::span<const LossCurve> curves, const SimConfig& config);

// --- file formats ---------------------------------------------------------

std::string curve_csv_header();  // regime,p_true,p_f,p_c,loss_weighted,loss_cce
std::string write_curve_rows(std::span<const LossCurve> curves);
std::string verdict_csv_header();  // regime,monotone_overall,condition_consistent,violations
std::string write_verdict_row(const RegimeVerdict& v);

}  // namespace explicable

#endif  // EXPLICABLE_SIMULATION_HPP_
