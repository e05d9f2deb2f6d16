#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gmmpc/graph.hpp"

namespace gmmpc {

using Clique = std::vector<NodeId>;

/// Maximal parental cliques of one node: maximal cliques of the skeleton
/// restricted to the node's parents. Members are sorted ascending; cliques
/// are ordered by size descending, then lexicographically.
struct MpcSet {
  NodeId node = 0;
  std::vector<Clique> cliques;

  friend bool operator==(const MpcSet&, const MpcSet&) = default;
};

enum class MpcBackend { paper, fast, brute };

/// Default bound on |PC(node)| for the permutation backend (8! orderings).
inline constexpr std::size_t kArrangementCap = 8;
inline constexpr std::size_t kBruteForceParentCap = 15;

/// Walks every ordering of PC(node), greedily growing a clique from the
/// parents it meets, and keeps each distinct result. Factorial cost; throws
/// Error(unsupported) when |PC(node)| exceeds `cap`.
MpcSet find_mpcs_paper(const Dag& dag, NodeId node, std::size_t cap = kArrangementCap);

/// Bron-Kerbosch with Tomita pivoting over the parent-induced skeleton.
MpcSet find_mpcs_fast(const Dag& dag, NodeId node);

/// Enumerates all parent subsets. Test oracle; at most 15 parents.
MpcSet brute_force_mpcs(const Dag& dag, NodeId node);

MpcSet find_mpcs(const Dag& dag, NodeId node, MpcBackend backend);

/// Sorts members and cliques into canonical order.
void canonicalize(std::vector<Clique>& cliques);

MpcBackend parse_backend(std::string_view name);
std::string_view to_string(MpcBackend backend);

/// {"node": "T", "mpcs": [["X","Y"],["Z"],["W"]]}
std::string mpc_json(const Dag& dag, const MpcSet& set);

}  // namespace gmmpc
