#include "explicable/error.hpp"

namespace explicable {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::empty_input: return "empty-input";
    case Errc::malformed_input: return "malformed-input";
    case Errc::duplicate_edge: return "duplicate-edge";
    case Errc::multiple_parents: return "multiple-parents";
    case Errc::multiple_roots: return "multiple-roots";
    case Errc::cycle_detected: return "cycle-detected";
    case Errc::unknown_node_reference: return "unknown-node-reference";
    case Errc::unknown_node: return "unknown-node";
    case Errc::index_out_of_range: return "index-out-of-range";
    case Errc::class_with_no_instances: return "class-with-no-instances";
    case Errc::missing_pair: return "missing-pair";
    case Errc::score_out_of_range: return "score-out-of-range";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::class_order_mismatch: return "class-order-mismatch";
    case Errc::empty_list: return "empty-list";
    case Errc::zero_row: return "zero-row";
    case Errc::invariant_violation: return "invariant-violation";
    case Errc::negative_weight: return "negative-weight";
    case Errc::domain_violation: return "domain-violation";
    case Errc::class_mismatch: return "class-mismatch";
    case Errc::divergence: return "divergence";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::invalid_config: return "invalid-config";
    case Errc::instance_coverage_mismatch: return "instance-coverage-mismatch";
    case Errc::true_class_disagreement: return "true-class-disagreement";
    case Errc::infeasible_grid: return "infeasible-grid";
    case Errc::invalid_score: return "invalid-score";
    case Errc::unknown_pair: return "unknown-pair";
    case Errc::duplicate_rating: return "duplicate-rating";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

bool is_io_error(Errc code) noexcept { return code == Errc::io_error; }

namespace {

std::string decorate(Errc code, const std::string& message, std::optional<std::size_t> line) {
  std::string out(to_string(code));
  if (line) out += " (line " + std::to_string(*line) + ")";
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(Errc code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, message, line)), code_(code), line_(line), message_(message) {}

}  // namespace explicable
