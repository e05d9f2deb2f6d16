#include "gmmpc/eval.hpp"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "gmmpc/error.hpp"

namespace gmmpc {

double avg_minus_loglik(const BnModel& bn, const Dataset& test, double epsilon) {
  if (test.rows() == 0) throw Error(ErrorCode::data, "cannot evaluate on an empty test set");
  return total_loss(bn, test, epsilon) / static_cast<double>(test.rows());
}

std::size_t param_count(const BnModel& bn) {
  std::size_t p = 0;
  for (const auto& nm : bn.nodes) {
    for (const auto& br : nm.branches) p += br.weights.size() + 2;
    p += nm.size() - 1;
  }
  return p;
}

double bic(double avg, std::size_t p, std::size_t n_test) {
  if (n_test < 1) throw Error(ErrorCode::invalid_argument, "BIC needs at least one test instance");
  const double n = static_cast<double>(n_test);
  return avg * n + 0.5 * static_cast<double>(p) * std::log(n);
}

EvalResult evaluate(const BnModel& bn, const Dataset& test, double epsilon) {
  EvalResult r;
  r.avg_minus_loglik = avg_minus_loglik(bn, test, epsilon);
  r.param_count = param_count(bn);
  r.n_test = test.rows();
  r.bic = bic(r.avg_minus_loglik, r.param_count, r.n_test);
  return r;
}

std::string to_json(const EvalResult& r) {
  nlohmann::ordered_json doc;
  doc["avg_minus_loglik"] = r.avg_minus_loglik;
  doc["bic"] = r.bic;
  doc["param_count"] = r.param_count;
  doc["n_test"] = r.n_test;
  return doc.dump();
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience_ < 1) throw Error(ErrorCode::invalid_argument, "patience must be >= 1");
}

bool EarlyStopping::update(double value) {
  ++epoch_;
  improved_ = epoch_ == 1 || value < best_;
  if (improved_) {
    best_ = value;
    best_epoch_ = epoch_;
    since_best_ = 0;
    return false;
  }
  return ++since_best_ >= patience_;
}

StopDecision early_stopping(std::span<const double> trace, std::size_t patience) {
  EarlyStopping es(patience);
  StopDecision d;
  for (double v : trace) {
    if (es.update(v)) {
      d.stop = true;
      d.stop_epoch = es.epochs();
      break;
    }
  }
  d.best_epoch = es.best_epoch();
  if (!d.stop) d.stop_epoch = es.epochs();
  return d;
}

namespace {

double draw_node(const NodeModel& nm, std::span<const double> row, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  std::size_t k = 0;
  double acc = nm.pi[0];
  while (k + 1 < nm.size() && u >= acc) acc += nm.pi[++k];
  const auto& br = nm.branches[k];
  std::normal_distribution<double> noise(0.0, 1.0);
  return branch_mean_row(br, row, nm.link) + std::sqrt(br.variance()) * noise(rng);
}

}  // namespace

Dataset sample(const BnModel& bn, std::size_t count, std::uint64_t seed) {
  const auto order = bn.dag.topological_order();
  const std::size_t n = bn.dag.size();
  std::vector<double> values(count * n, 0.0);
  for (std::size_t r = 0; r < count; ++r) {
    std::mt19937_64 rng(mix_seed(seed, r));
    std::span<double> row(values.data() + r * n, n);
    for (NodeId v : order) row[v] = draw_node(bn.nodes[v], row, rng);
  }
  return Dataset(bn.dag.names(), std::move(values));
}

std::vector<double> predict_node(const BnModel& bn, NodeId node, const Dataset& parent_rows,
                                 std::uint64_t seed) {
  const auto& parents = bn.dag.parents(node);
  std::vector<std::size_t> cols;
  for (NodeId p : parents) {
    auto c = parent_rows.column_index(bn.dag.name(p));
    if (!c)
      throw Error(ErrorCode::data, "prediction of '" + bn.dag.name(node) + "' needs column '" +
                                       bn.dag.name(p) + "'");
    cols.push_back(*c);
  }
  std::vector<double> out(parent_rows.rows());
  std::vector<double> row(bn.dag.size(), 0.0);
  for (std::size_t r = 0; r < parent_rows.rows(); ++r) {
    for (std::size_t i = 0; i < parents.size(); ++i) row[parents[i]] = parent_rows.at(r, cols[i]);
    std::mt19937_64 rng(mix_seed(seed, r));
    out[r] = draw_node(bn.nodes[node], row, rng);
  }
  return out;
}

}  // namespace gmmpc
