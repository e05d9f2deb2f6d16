#include "gmmpc/mpc.hpp"

#include <algorithm>
#include <cstdint>
#include <iterator>

#include <nlohmann/json.hpp>

#include "gmmpc/error.hpp"

namespace gmmpc {

namespace {

bool is_clique(const Dag& dag, const Clique& members) {
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j)
      if (!dag.adjacent(members[i], members[j])) return false;
  return true;
}

bool is_subset(const Clique& a, const Clique& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Bron-Kerbosch over local indices 0..m-1 with neighbour lists `nbr`.
// All sets are kept sorted so intersections are linear merges.
void bron_kerbosch(const std::vector<std::vector<std::size_t>>& nbr,
                   std::vector<std::size_t>& r, std::vector<std::size_t> p,
                   std::vector<std::size_t> x,
                   std::vector<std::vector<std::size_t>>& out) {
  if (p.empty()) {
    if (x.empty()) out.push_back(r);
    return;
  }
  // Pivot: vertex of P u X with the most neighbours in P.
  std::size_t pivot = p.front();
  std::size_t best = 0;
  for (const auto* set : {&p, &x}) {
    for (std::size_t u : *set) {
      std::vector<std::size_t> common;
      std::set_intersection(p.begin(), p.end(), nbr[u].begin(), nbr[u].end(),
                            std::back_inserter(common));
      if (common.size() > best) {
        pivot = u;
        best = common.size();
      }
    }
  }
  std::vector<std::size_t> candidates;
  std::set_difference(p.begin(), p.end(), nbr[pivot].begin(), nbr[pivot].end(),
                      std::back_inserter(candidates));
  for (std::size_t v : candidates) {
    std::vector<std::size_t> p_next;
    std::vector<std::size_t> x_next;
    std::set_intersection(p.begin(), p.end(), nbr[v].begin(), nbr[v].end(),
                          std::back_inserter(p_next));
    std::set_intersection(x.begin(), x.end(), nbr[v].begin(), nbr[v].end(),
                          std::back_inserter(x_next));
    r.push_back(v);
    bron_kerbosch(nbr, r, std::move(p_next), std::move(x_next), out);
    r.pop_back();
    p.erase(std::lower_bound(p.begin(), p.end(), v));
    x.insert(std::lower_bound(x.begin(), x.end(), v), v);
  }
}

}  // namespace

void canonicalize(std::vector<Clique>& cliques) {
  for (auto& c : cliques) std::sort(c.begin(), c.end());
  std::sort(cliques.begin(), cliques.end(), [](const Clique& a, const Clique& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
}

MpcSet find_mpcs_paper(const Dag& dag, NodeId node, std::size_t cap) {
  std::vector<NodeId> arrangement = dag.pc_set(node);
  if (arrangement.size() > cap)
    throw Error(ErrorCode::unsupported,
                "node '" + dag.name(node) + "' has " + std::to_string(arrangement.size()) +
                    " parents+children, above the arrangement cap of " + std::to_string(cap) +
                    "; use the fast backend");
  const auto& parents = dag.parents(node);
  const auto is_parent = [&](NodeId v) {
    return std::binary_search(parents.begin(), parents.end(), v);
  };

  MpcSet result{node, {}};
  // arrangement starts sorted, so next_permutation visits every ordering.
  do {
    Clique clique;
    for (NodeId candidate : arrangement) {
      if (!is_parent(candidate)) continue;
      // clique must lie inside PC(candidate): every member adjacent to it.
      const bool fits = std::all_of(clique.begin(), clique.end(), [&](NodeId m) {
        return dag.adjacent(m, candidate);
      });
      if (fits) clique.insert(std::lower_bound(clique.begin(), clique.end(), candidate), candidate);
    }
    if (!clique.empty() &&
        std::find(result.cliques.begin(), result.cliques.end(), clique) == result.cliques.end())
      result.cliques.push_back(std::move(clique));
  } while (std::next_permutation(arrangement.begin(), arrangement.end()));
  canonicalize(result.cliques);
  return result;
}

MpcSet find_mpcs_fast(const Dag& dag, NodeId node) {
  const auto& parents = dag.parents(node);
  const std::size_t m = parents.size();
  MpcSet result{node, {}};
  if (m == 0) return result;

  std::vector<std::vector<std::size_t>> nbr(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && dag.adjacent(parents[i], parents[j])) nbr[i].push_back(j);

  std::vector<std::size_t> all(m);
  for (std::size_t i = 0; i < m; ++i) all[i] = i;
  std::vector<std::size_t> r;
  std::vector<std::vector<std::size_t>> local;
  bron_kerbosch(nbr, r, std::move(all), {}, local);

  for (const auto& c : local) {
    Clique clique;
    for (std::size_t i : c) clique.push_back(parents[i]);
    result.cliques.push_back(std::move(clique));
  }
  canonicalize(result.cliques);
  return result;
}

MpcSet brute_force_mpcs(const Dag& dag, NodeId node) {
  const auto& parents = dag.parents(node);
  const std::size_t m = parents.size();
  if (m > kBruteForceParentCap)
    throw Error(ErrorCode::unsupported, "node '" + dag.name(node) + "' has " +
                                            std::to_string(m) +
                                            " parents; brute force supports at most 15");
  std::vector<Clique> cliques;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << m); ++mask) {
    Clique c;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (std::uint32_t{1} << i)) c.push_back(parents[i]);
    if (is_clique(dag, c)) cliques.push_back(std::move(c));
  }
  std::vector<Clique> maximal;
  for (const auto& c : cliques) {
    const bool dominated = std::any_of(cliques.begin(), cliques.end(), [&](const Clique& o) {
      return o.size() > c.size() && is_subset(c, o);
    });
    if (!dominated) maximal.push_back(c);
  }
  canonicalize(maximal);
  return {node, std::move(maximal)};
}

MpcSet find_mpcs(const Dag& dag, NodeId node, MpcBackend backend) {
  switch (backend) {
    case MpcBackend::paper:
      return find_mpcs_paper(dag, node);
    case MpcBackend::fast:
      return find_mpcs_fast(dag, node);
    case MpcBackend::brute:
      return brute_force_mpcs(dag, node);
  }
  throw Error(ErrorCode::invalid_argument, "unknown MPC backend");
}

MpcBackend parse_backend(std::string_view name) {
  if (name == "paper") return MpcBackend::paper;
  if (name == "fast") return MpcBackend::fast;
  if (name == "brute") return MpcBackend::brute;
  throw Error(ErrorCode::invalid_argument,
              "unknown backend '" + std::string(name) + "' (expected paper, fast or brute)");
}

std::string_view to_string(MpcBackend backend) {
  switch (backend) {
    case MpcBackend::paper:
      return "paper";
    case MpcBackend::fast:
      return "fast";
    case MpcBackend::brute:
      return "brute";
  }
  return "?";
}

std::string mpc_json(const Dag& dag, const MpcSet& set) {
  nlohmann::ordered_json doc;
  doc["node"] = dag.name(set.node);
  auto list = nlohmann::ordered_json::array();
  for (const auto& c : set.cliques) {
    auto members = nlohmann::ordered_json::array();
    for (NodeId v : c) members.push_back(dag.name(v));
    list.push_back(std::move(members));
  }
  doc["mpcs"] = std::move(list);
  return doc.dump();
}

}  // namespace gmmpc
