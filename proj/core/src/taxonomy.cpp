#include "explicable/taxonomy.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "explicable/csv.hpp"
#include "explicable/error.hpp"

namespace explicable {

namespace {

bool valid_identifier(std::string_view s) {
  return !s.empty() && s.find_first_of(" \t\r\n\v\f") == std::string_view::npos;
}

}  // namespace

Taxonomy Taxonomy::parse(std::string_view text) {
  auto lines = csv::parse(text, '\t', /*skip_comments=*/true);
  if (lines.empty()) throw Error(Errc::empty_input, "taxonomy contains no edges", 1);

  // child -> (parent, line)
  std::map<std::string, std::pair<std::string, std::size_t>> parent_of;
  // node -> first line it appears on
  std::map<std::string, std::size_t> first_seen;

  for (const auto& line : lines) {
    if (line.fields.size() != 2 || !valid_identifier(line.fields[0]) ||
        !valid_identifier(line.fields[1])) {
      throw Error(Errc::malformed_input, "expected 'parent<TAB>child'", line.number);
    }
    const auto& parent = line.fields[0];
    const auto& child = line.fields[1];
    if (parent == child) throw Error(Errc::cycle_detected, "self-loop on " + parent, line.number);
    first_seen.try_emplace(parent, line.number);
    first_seen.try_emplace(child, line.number);
    auto [it, inserted] = parent_of.try_emplace(child, parent, line.number);
    if (!inserted) {
      if (it->second.first == parent) {
        throw Error(Errc::duplicate_edge, parent + " -> " + child + " repeated", line.number);
      }
      throw Error(Errc::multiple_parents,
                  child + " already has parent " + it->second.first + " (line " +
                      std::to_string(it->second.second) + ")",
                  line.number);
    }
  }

  Taxonomy tax;
  tax.names_.reserve(first_seen.size());
  for (const auto& [name, _] : first_seen) {
    tax.index_.emplace(name, tax.names_.size());
    tax.names_.push_back(name);
  }

  std::vector<NodeId> roots;
  tax.parent_.assign(tax.names_.size(), kNoParent);
  for (NodeId id = 0; id < tax.names_.size(); ++id) {
    auto it = parent_of.find(tax.names_[id]);
    if (it == parent_of.end()) {
      roots.push_back(id);
    } else {
      tax.parent_[id] = tax.index_.at(it->second.first);
    }
  }

  if (roots.size() > 1) {
    // Report whichever extra root appears latest in the file order.
    std::vector<std::size_t> seen;
    for (auto r : roots) seen.push_back(first_seen.at(tax.names_[r]));
    std::sort(seen.begin(), seen.end());
    std::string listing;
    for (auto r : roots) listing += (listing.empty() ? "" : ", ") + tax.names_[r];
    throw Error(Errc::multiple_roots, "parentless nodes: " + listing, seen[1]);
  }
  if (roots.empty()) {
    const auto& [child, info] = *parent_of.begin();
    throw Error(Errc::cycle_detected, "no root; " + child + " lies on a cycle", info.second);
  }
  tax.root_ = roots.front();

  // Depths by walking parent links with memoization; anything that never
  // reaches the root is on a cycle.
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  tax.depth_.assign(tax.names_.size(), kUnset);
  tax.depth_[tax.root_] = 0;
  std::vector<NodeId> chain;
  for (NodeId start = 0; start < tax.names_.size(); ++start) {
    chain.clear();
    NodeId cur = start;
    while (tax.depth_[cur] == kUnset) {
      chain.push_back(cur);
      cur = tax.parent_[cur];
      if (chain.size() > tax.names_.size()) {
        const auto& info = parent_of.at(tax.names_[start]);
        throw Error(Errc::cycle_detected, tax.names_[start] + " does not reach the root " +
                                              tax.names_[tax.root_], info.second);
      }
    }
    std::size_t d = tax.depth_[cur];
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) tax.depth_[*it] = ++d;
  }
  return tax;
}

bool Taxonomy::contains(std::string_view name) const {
  return index_.find(std::string(name)) != index_.end();
}

Taxonomy::NodeId Taxonomy::id(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error(Errc::unknown_node, "no node '" + std::string(name) + "'");
  return it->second;
}

std::optional<Taxonomy::NodeId> Taxonomy::parent(NodeId id) const {
  auto p = parent_.at(id);
  if (p == kNoParent) return std::nullopt;
  return p;
}

std::size_t Taxonomy::shortest_path_length(NodeId a, NodeId b) const {
  if (a >= size() || b >= size()) throw Error(Errc::unknown_node, "node id out of range");
  std::size_t length = 0;
  while (depth_[a] > depth_[b]) { a = parent_[a]; ++length; }
  while (depth_[b] > depth_[a]) { b = parent_[b]; ++length; }
  while (a != b) {
    a = parent_[a];
    b = parent_[b];
    length += 2;
  }
  return length;
}

std::size_t Taxonomy::shortest_path_length(std::string_view a, std::string_view b) const {
  return shortest_path_length(id(a), id(b));
}

double Taxonomy::path_similarity(NodeId a, NodeId b) const {
  return 1.0 / (1.0 + static_cast<double>(shortest_path_length(a, b)));
}

double Taxonomy::path_similarity(std::string_view a, std::string_view b) const {
  return path_similarity(id(a), id(b));
}

LabelMap::LabelMap(std::vector<LabelEntry> entries) {
  if (entries.empty()) throw Error(Errc::empty_input, "label map has no classes");
  std::sort(entries.begin(), entries.end(),
            [](const LabelEntry& x, const LabelEntry& y) { return x.class_index < y.class_index; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].class_index != i) {
      throw Error(Errc::index_out_of_range,
                  "class indices must be 0.." + std::to_string(entries.size() - 1) +
                      " without gaps or duplicates; found " +
                      std::to_string(entries[i].class_index) + " at position " + std::to_string(i));
    }
    if (!valid_identifier(entries[i].node)) {
      throw Error(Errc::malformed_input, "class " + std::to_string(i) + " has an invalid node id");
    }
  }
  entries_ = std::move(entries);
}

LabelMap LabelMap::parse(std::string_view text) {
  auto lines = csv::parse(text);
  if (lines.empty()) throw Error(Errc::empty_input, "label map is empty", 1);
  const auto& header = lines.front();
  if (header.fields != std::vector<std::string>{"index", "name", "node"}) {
    throw Error(Errc::malformed_input, "expected header 'index,name,node'", header.number);
  }
  std::vector<LabelEntry> entries;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (l.fields.size() != 3) throw Error(Errc::malformed_input, "expected 3 fields", l.number);
    entries.push_back({csv::parse_index(l.fields[0], l.number), l.fields[1], l.fields[2]});
  }
  return LabelMap(std::move(entries));
}

std::vector<std::string> LabelMap::class_names() const {
  std::vector<std::string> names;
  names.reserve(entries_.size());
  for (const auto& e : entries_) names.push_back(e.class_name);
  return names;
}

void LabelMap::validate_against(const Taxonomy& tax) const {
  for (const auto& e : entries_) {
    if (!tax.contains(e.node)) {
      throw Error(Errc::unknown_node_reference,
                  "class " + e.class_name + " maps to missing node '" + e.node + "'");
    }
  }
}

}  // namespace explicable
