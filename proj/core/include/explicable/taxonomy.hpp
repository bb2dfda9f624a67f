#ifndef EXPLICABLE_TAXONOMY_HPP_
#define EXPLICABLE_TAXONOMY_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace explicable {

/// A rooted hypernym tree. Immutable once parsed; every query is const.
///
/// Node identifiers are case-sensitive exact strings. Internally nodes are
/// numbered in lexicographic order of their identifiers, so two edge lists
/// that differ only in line order produce identical objects.
class Taxonomy {
 public:
  using NodeId = std::size_t;

  /// Parses `parent<TAB>child` lines. Blank lines and lines starting with
  /// '#' are ignored. Throws Error with the offending line number.
  static Taxonomy parse(std::string_view text);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& root() const noexcept { return names_[root_]; }
  const std::vector<std::string>& nodes() const noexcept { return names_; }

  bool contains(std::string_view name) const;
  /// Throws Error(unknown-node) if absent.
  NodeId id(std::string_view name) const;
  const std::string& name(NodeId id) const { return names_.at(id); }

  std::optional<NodeId> parent(NodeId id) const;
  std::size_t depth(NodeId id) const { return depth_.at(id); }

  /// Edge count of the unique tree path between a and b.
  std::size_t shortest_path_length(std::string_view a, std::string_view b) const;
  std::size_t shortest_path_length(NodeId a, NodeId b) const;

  /// 1 / (1 + shortest_path_length). Equals 1 exactly iff a == b.
  double path_similarity(std::string_view a, std::string_view b) const;
  double path_similarity(NodeId a, NodeId b) const;

  bool operator==(const Taxonomy&) const = default;

 private:
  static constexpr NodeId kNoParent = static_cast<NodeId>(-1);

  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<NodeId> parent_;
  std::vector<std::size_t> depth_;
  NodeId root_ = 0;
};

struct LabelEntry {
  std::size_t class_index;
  std::string class_name;
  std::string node;
};

/// Binds dataset classes 0..n-1 to taxonomy nodes, one node per class.
class LabelMap {
 public:
  /// Entries may arrive in any order; indices must form 0..n-1 exactly.
  explicit LabelMap(std::vector<LabelEntry> entries);

  /// CSV with header `index,name,node`.
  static LabelMap parse(std::string_view text);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<LabelEntry>& entries() const noexcept { return entries_; }
  std::vector<std::string> class_names() const;

  /// Throws Error(unknown-node-reference) naming the first unmapped node.
  void validate_against(const Taxonomy& tax) const;

 private:
  std::vector<LabelEntry> entries_;
};

}  // namespace explicable

#endif  // EXPLICABLE_TAXONOMY_HPP_
