#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gmmpc {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

/// Directed acyclic graph over named nodes. Node ids are dense and follow the
/// order the names were given in. Immutable once built.
class Dag {
 public:
  Dag() = default;

  /// Validates and builds. Throws Error(graph) on self-loops, duplicate or
  /// antiparallel edges, out-of-range ids, duplicate names, or a cycle.
  Dag(std::vector<std::string> names, std::vector<Edge> edges);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(NodeId v) const;
  std::optional<NodeId> find(std::string_view name) const;
  /// Like find() but throws Error(graph) naming the missing node.
  NodeId id(std::string_view name) const;

  /// Edges in insertion order.
  const std::vector<Edge>& edges() const { return edges_; }

  /// Sorted ascending.
  const std::vector<NodeId>& parents(NodeId v) const;
  const std::vector<NodeId>& children(NodeId v) const;
  std::vector<NodeId> pc_set(NodeId v) const;

  bool has_edge(NodeId from, NodeId to) const;
  /// Adjacent in the skeleton, ignoring direction.
  bool adjacent(NodeId a, NodeId b) const;

  /// True iff v has two parents with no edge between them (an immorality).
  bool is_collider(NodeId v) const;

  /// Kahn's algorithm, smallest ready id first.
  std::vector<NodeId> topological_order() const;

 private:
  void check(NodeId v) const;

  std::vector<std::string> names_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<std::vector<bool>> adj_;
};

/// Graph file: {"nodes": [...], "edges": [["parent", "child"], ...]}.
/// Other top-level keys (e.g. "description") are ignored.
Dag parse_graph(std::string_view text);
Dag load_graph(const std::string& path);

std::string serialize_graph(const Dag& dag);
std::string to_dot(const Dag& dag);

}  // namespace gmmpc
