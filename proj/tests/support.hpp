#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gmmpc/data.hpp"
#include "gmmpc/eval.hpp"
#include "gmmpc/graph.hpp"
#include "gmmpc/model.hpp"

#ifndef GMMPC_SOURCE_DIR
#define GMMPC_SOURCE_DIR "."
#endif

namespace testing_support {

inline std::string source_path(const std::string& rel) {
  return std::string(GMMPC_SOURCE_DIR) + "/" + rel;
}

inline std::vector<std::string> node_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
  return names;
}

inline bool acyclic(std::size_t n, const std::vector<gmmpc::Edge>& edges) {
  std::vector<std::size_t> indeg(n, 0);
  for (auto [a, b] : edges) ++indeg[b];
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push_back(v);
  std::size_t seen = 0;
  while (!ready.empty()) {
    const auto v = ready.back();
    ready.pop_back();
    ++seen;
    for (auto [a, b] : edges)
      if (a == v && --indeg[b] == 0) ready.push_back(b);
  }
  return seen == n;
}

/// Every labelled DAG on n nodes: each unordered pair is absent, a->b or b->a.
inline std::vector<gmmpc::Dag> all_dags(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  std::size_t total = 1;
  for (std::size_t i = 0; i < pairs.size(); ++i) total *= 3;
  std::vector<gmmpc::Dag> out;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<gmmpc::Edge> edges;
    std::size_t c = code;
    for (auto [a, b] : pairs) {
      const std::size_t t = c % 3;
      c /= 3;
      if (t == 1) edges.emplace_back(a, b);
      if (t == 2) edges.emplace_back(b, a);
    }
    if (acyclic(n, edges)) out.emplace_back(node_names(n), edges);
  }
  return out;
}

/// Random DAG: edges follow a shuffled node order so ids are not topological.
inline gmmpc::Dag random_dag(std::mt19937_64& rng, std::size_t n, double density) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution coin(density);
  std::vector<gmmpc::Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) edges.emplace_back(order[i], order[j]);
  std::shuffle(edges.begin(), edges.end(), rng);
  return gmmpc::Dag(node_names(n), edges);
}

/// Exhaustive DAGs on up to 5 nodes plus `random_count` seeded DAGs on up to
/// 8 nodes.
inline std::vector<gmmpc::Dag> dag_corpus(std::size_t random_count = 200) {
  std::vector<gmmpc::Dag> corpus;
  for (std::size_t n = 1; n <= 5; ++n) {
    auto dags = all_dags(n);
    corpus.insert(corpus.end(), std::make_move_iterator(dags.begin()),
                  std::make_move_iterator(dags.end()));
  }
  std::mt19937_64 rng(20240531);
  std::uniform_int_distribution<std::size_t> size(1, 8);
  std::uniform_real_distribution<double> dens(0.1, 0.9);
  for (std::size_t i = 0; i < random_count; ++i) corpus.push_back(random_dag(rng, size(rng), dens(rng)));
  return corpus;
}

/// A -> C <- B with C a two-branch mixture (one branch per parent).
inline gmmpc::BnModel collider_truth() {
  gmmpc::Dag dag({"A", "B", "C"}, {{0, 2}, {1, 2}});
  auto bn = gmmpc::build_model(dag, gmmpc::ModelKind::gmm_mpc, gmmpc::Link::linear);
  bn.nodes[0].branches[0].bias = 0.0;
  bn.nodes[1].branches[0].bias = 0.5;
  bn.nodes[1].branches[0].log_var = std::log(0.5);
  auto& c = bn.nodes[2];
  c.branches[0].weights = {1.5};
  c.branches[0].bias = -1.0;
  c.branches[0].log_var = std::log(0.2);
  c.branches[1].weights = {-2.0};
  c.branches[1].bias = 1.0;
  c.branches[1].log_var = std::log(0.4);
  c.pi = {0.35, 0.65};
  return bn;
}

inline gmmpc::Dataset collider_data(std::size_t n, std::uint64_t seed) {
  return gmmpc::sample(collider_truth(), n, seed);
}

}  // namespace testing_support
