#include "gmmpc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gmmpc/error.hpp"
#include "gmmpc/mpc.hpp"

namespace gmmpc {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // ln(2 pi) / 2

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Returns ln(sum_k pi_k N_k) and fills log_terms with ln(pi_k N_k).
double log_mixture(const NodeModel& model, std::span<const double> row,
                   std::vector<double>& log_terms, double x) {
  const std::size_t k = model.size();
  log_terms.resize(k);
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < k; ++b) {
    const double pi = model.pi[b];
    log_terms[b] = pi > 0.0 ? std::log(pi) + branch_logpdf_row(model.branches[b], row, x, model.link)
                            : -std::numeric_limits<double>::infinity();
    hi = std::max(hi, log_terms[b]);
  }
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  double sum = 0.0;
  for (double t : log_terms) sum += std::exp(t - hi);
  return hi + std::log(sum);
}

// Scatters per-branch parent values into a row indexed by node id.
std::vector<double> scatter(const NodeModel& model,
                            const std::vector<std::vector<double>>& parent_values, double x) {
  if (parent_values.size() != model.size())
    throw Error(ErrorCode::invalid_argument, "expected parent values for each of " +
                                                 std::to_string(model.size()) + " branches");
  NodeId top = model.node;
  for (const auto& br : model.branches)
    for (NodeId v : br.inputs) top = std::max(top, v);
  std::vector<double> row(top + 1, 0.0);
  for (std::size_t b = 0; b < model.size(); ++b) {
    const auto& br = model.branches[b];
    if (parent_values[b].size() != br.inputs.size())
      throw Error(ErrorCode::invalid_argument, "branch " + std::to_string(b) + " expects " +
                                                   std::to_string(br.inputs.size()) +
                                                   " parent values");
    for (std::size_t i = 0; i < br.inputs.size(); ++i) row[br.inputs[i]] = parent_values[b][i];
  }
  row[model.node] = x;
  return row;
}

}  // namespace

ModelKind parse_kind(std::string_view s) {
  if (s == "lg") return ModelKind::lg;
  if (s == "gmm") return ModelKind::gmm;
  if (s == "gmm-mpc" || s == "gmm_mpc") return ModelKind::gmm_mpc;
  throw Error(ErrorCode::invalid_argument,
              "unknown model kind '" + std::string(s) + "' (expected lg, gmm or gmm-mpc)");
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::lg:
      return "lg";
    case ModelKind::gmm:
      return "gmm";
    case ModelKind::gmm_mpc:
      return "gmm-mpc";
  }
  return "?";
}

Link parse_link(std::string_view s) {
  if (s == "linear") return Link::linear;
  if (s == "sigmoid") return Link::sigmoid;
  throw Error(ErrorCode::invalid_argument,
              "unknown link '" + std::string(s) + "' (expected linear or sigmoid)");
}

std::string_view to_string(Link link) { return link == Link::linear ? "linear" : "sigmoid"; }

double BranchParams::variance() const { return std::exp(log_var); }

BnModel build_model(const Dag& dag, ModelKind kind, Link link, std::size_t gmm_branch_count) {
  if (gmm_branch_count < 1)
    throw Error(ErrorCode::invalid_argument, "gmm branch count must be at least 1");
  BnModel bn;
  bn.dag = dag;
  bn.kind = kind;
  bn.link = link;
  for (NodeId v = 0; v < dag.size(); ++v) {
    NodeModel nm;
    nm.node = v;
    nm.kind = kind;
    nm.link = link;
    const auto& parents = dag.parents(v);
    std::vector<std::vector<NodeId>> layout;
    switch (kind) {
      case ModelKind::lg:
        layout.push_back(parents);
        break;
      case ModelKind::gmm:
        layout.assign(gmm_branch_count, parents);
        break;
      case ModelKind::gmm_mpc:
        layout = find_mpcs_fast(dag, v).cliques;
        if (layout.empty()) layout.emplace_back();
        break;
    }
    for (std::size_t b = 0; b < layout.size(); ++b) {
      BranchParams br;
      br.inputs = layout[b];
      br.weights.assign(br.inputs.size(), 0.0);
      if (kind == ModelKind::gmm && layout.size() > 1)
        br.bias = -1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(layout.size() - 1);
      nm.branches.push_back(std::move(br));
    }
    nm.pi.assign(nm.branches.size(), 1.0 / static_cast<double>(nm.branches.size()));
    bn.nodes.push_back(std::move(nm));
  }
  return bn;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double branch_mean(const BranchParams& params, std::span<const double> parent_values, Link link) {
  if (parent_values.size() != params.weights.size())
    throw Error(ErrorCode::invalid_argument,
                "branch has " + std::to_string(params.weights.size()) + " weights but " +
                    std::to_string(parent_values.size()) + " parent values were given");
  double z = 0.0;
  for (std::size_t i = 0; i < parent_values.size(); ++i) z += params.weights[i] * parent_values[i];
  return link == Link::linear ? z + params.bias : sigmoid(z) + params.bias;
}

double branch_logpdf(const BranchParams& params, std::span<const double> parent_values, double x,
                     Link link) {
  if (!std::isfinite(x) || !std::isfinite(params.log_var))
    throw Error(ErrorCode::numeric, "non-finite input to branch density");
  for (double p : parent_values)
    if (!std::isfinite(p)) throw Error(ErrorCode::numeric, "non-finite parent value");
  const double r = x - branch_mean(params, parent_values, link);
  return -kHalfLog2Pi - 0.5 * params.log_var - 0.5 * r * r * std::exp(-params.log_var);
}

double branch_mean_row(const BranchParams& params, std::span<const double> row, Link link) {
  double z = 0.0;
  for (std::size_t i = 0; i < params.inputs.size(); ++i) z += params.weights[i] * row[params.inputs[i]];
  return link == Link::linear ? z + params.bias : sigmoid(z) + params.bias;
}

double branch_logpdf_row(const BranchParams& params, std::span<const double> row, double x,
                         Link link) {
  const double r = x - branch_mean_row(params, row, link);
  return -kHalfLog2Pi - 0.5 * params.log_var - 0.5 * r * r * std::exp(-params.log_var);
}

double node_logpdf_row(const NodeModel& model, std::span<const double> row, double epsilon) {
  thread_local std::vector<double> terms;
  const double lm = log_mixture(model, row, terms, row[model.node]);
  return epsilon > 0.0 ? log_add(lm, std::log(epsilon)) : lm;
}

double node_mixture_logpdf(const NodeModel& model,
                           const std::vector<std::vector<double>>& parent_values, double x,
                           double epsilon) {
  for (const auto& pv : parent_values)
    for (double p : pv)
      if (!std::isfinite(p)) throw Error(ErrorCode::numeric, "non-finite parent value");
  if (!std::isfinite(x)) throw Error(ErrorCode::numeric, "non-finite node value");
  const auto row = scatter(model, parent_values, x);
  return node_logpdf_row(model, row, epsilon);
}

std::vector<double> responsibilities_row(const NodeModel& model, std::span<const double> row,
                                         double epsilon) {
  std::vector<double> terms;
  double denom = log_mixture(model, row, terms, row[model.node]);
  if (epsilon > 0.0) denom = log_add(denom, std::log(epsilon));
  std::vector<double> gamma(model.size(), 0.0);
  if (denom == -std::numeric_limits<double>::infinity()) return gamma;
  for (std::size_t k = 0; k < model.size(); ++k) gamma[k] = std::exp(terms[k] - denom);
  return gamma;
}

std::vector<double> responsibilities(const NodeModel& model,
                                     const std::vector<std::vector<double>>& parent_values,
                                     double x, double epsilon) {
  const auto row = scatter(model, parent_values, x);
  return responsibilities_row(model, row, epsilon);
}

Dataset align_to_graph(const Dataset& data, const Dag& dag) { return data.select(dag.names()); }

double batch_loss(const BnModel& bn, const Dataset& aligned, std::span<const std::size_t> rows,
                  double epsilon) {
  double loss = 0.0;
  for (std::size_t r : rows) {
    const auto row = aligned.row(r);
    for (const auto& nm : bn.nodes) loss -= node_logpdf_row(nm, row, epsilon);
  }
  return loss;
}

double total_loss(const BnModel& bn, const Dataset& data, double epsilon) {
  if (data.rows() == 0) return 0.0;
  const Dataset aligned = align_to_graph(data, bn.dag);
  double loss = 0.0;
  for (std::size_t r = 0; r < aligned.rows(); ++r) {
    const auto row = aligned.row(r);
    for (const auto& nm : bn.nodes) loss -= node_logpdf_row(nm, row, epsilon);
  }
  return loss;
}

void validate(const BnModel& bn) {
  if (bn.nodes.size() != bn.dag.size())
    throw Error(ErrorCode::invalid_argument, "model has " + std::to_string(bn.nodes.size()) +
                                                 " node models for " +
                                                 std::to_string(bn.dag.size()) + " graph nodes");
  for (NodeId v = 0; v < bn.nodes.size(); ++v) {
    const auto& nm = bn.nodes[v];
    const auto& name = bn.dag.name(v);
    if (nm.node != v) throw Error(ErrorCode::invalid_argument, "node model order mismatch at '" + name + "'");
    if (nm.branches.empty() || nm.pi.size() != nm.branches.size())
      throw Error(ErrorCode::invalid_argument, "node '" + name + "' has inconsistent branch/pi sizes");
    double total = 0.0;
    for (double p : nm.pi) {
      if (!(p >= 0.0)) throw Error(ErrorCode::invalid_argument, "node '" + name + "' has a negative pi");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw Error(ErrorCode::invalid_argument, "pi of node '" + name + "' does not sum to 1");
    const auto& parents = bn.dag.parents(v);
    for (std::size_t b = 0; b < nm.size(); ++b) {
      const auto& br = nm.branches[b];
      if (br.weights.size() != br.inputs.size())
        throw Error(ErrorCode::invalid_argument, "node '" + name + "' branch " +
                                                     std::to_string(b) + ": weight/input size mismatch");
      for (NodeId in : br.inputs)
        if (!std::binary_search(parents.begin(), parents.end(), in))
          throw Error(ErrorCode::invalid_argument, "node '" + name + "' branch " +
                                                       std::to_string(b) + " uses a non-parent input");
    }
  }
}

}  // namespace gmmpc
