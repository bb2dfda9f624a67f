#ifndef EXPLICABLE_ERROR_HPP_
#define EXPLICABLE_ERROR_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace explicable {

/// Machine-readable failure categories. Their string forms are the
/// kebab-case codes printed by the command-line tool.
enum class Errc {
  // taxonomy / label map
  empty_input,
  malformed_input,
  duplicate_edge,
  multiple_parents,
  multiple_roots,
  cycle_detected,
  unknown_node_reference,
  unknown_node,
  // weights
  index_out_of_range,
  class_with_no_instances,
  missing_pair,
  score_out_of_range,
  shape_mismatch,
  class_order_mismatch,
  empty_list,
  zero_row,
  invariant_violation,
  // loss
  negative_weight,
  domain_violation,
  // trainer
  class_mismatch,
  divergence,
  dimension_mismatch,
  invalid_config,
  // metrics
  instance_coverage_mismatch,
  true_class_disagreement,
  // simulation
  infeasible_grid,
  // labeling
  invalid_score,
  unknown_pair,
  duplicate_rating,
  // environment
  io_error,
};

std::string_view to_string(Errc code) noexcept;

/// True for codes caused by the environment rather than by invalid input.
bool is_io_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

  Errc code() const noexcept { return code_; }
  /// 1-based source line for parse errors.
  std::optional<std::size_t> line() const noexcept { return line_; }
  /// The message without the code and line decoration of what().
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::optional<std::size_t> line_;
  std::string message_;
};

}  // namespace explicable

#endif  // EXPLICABLE_ERROR_HPP_
