#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmmpc/data.hpp"
#include "gmmpc/graph.hpp"

namespace gmmpc {

enum class ModelKind { lg, gmm, gmm_mpc };
enum class Link { linear, sigmoid };

ModelKind parse_kind(std::string_view s);
std::string_view to_string(ModelKind kind);
Link parse_link(std::string_view s);
std::string_view to_string(Link link);

inline constexpr double kDefaultEpsilon = 1e-8;
inline constexpr double kVarianceFloor = 1e-6;
inline constexpr std::size_t kDefaultGmmBranches = 3;

/// One Gaussian branch: x ~ N(mean(p), exp(log_var)), where mean is
/// w.p + b (linear) or sigmoid(w.p) + b (sigmoid).
struct BranchParams {
  std::vector<NodeId> inputs;
  std::vector<double> weights;
  double bias = 0.0;
  double log_var = 0.0;

  double variance() const;
};

struct NodeModel {
  NodeId node = 0;
  ModelKind kind = ModelKind::gmm_mpc;
  Link link = Link::linear;
  std::vector<BranchParams> branches;
  std::vector<double> pi;

  std::size_t size() const { return branches.size(); }
};

struct BnModel {
  Dag dag;
  ModelKind kind = ModelKind::gmm_mpc;
  Link link = Link::linear;
  std::vector<NodeModel> nodes;
  std::optional<NormStats> normalization;
};

/// Builds the branch layout for every node: one branch over all parents (lg),
/// `gmm_branch_count` branches over all parents (gmm) or one branch per
/// maximal parental clique (gmm-mpc). Root nodes always get a parentless
/// branch. Parameters start at w = 0, b = 0, variance 1 and uniform pi; gmm
/// branch biases are spread evenly over [-1, 1] since identical branches
/// would stay identical under any gradient or EM update.
BnModel build_model(const Dag& dag, ModelKind kind, Link link,
                    std::size_t gmm_branch_count = kDefaultGmmBranches);

double sigmoid(double z);

double branch_mean(const BranchParams& params, std::span<const double> parent_values, Link link);
double branch_logpdf(const BranchParams& params, std::span<const double> parent_values, double x,
                     Link link);

/// Same as above but reading the branch inputs out of a full row whose
/// entries are indexed by node id.
double branch_mean_row(const BranchParams& params, std::span<const double> row, Link link);
double branch_logpdf_row(const BranchParams& params, std::span<const double> row, double x,
                         Link link);

/// ln(sum_k pi_k N_k + epsilon), evaluated with a max shift.
double node_mixture_logpdf(const NodeModel& model,
                           const std::vector<std::vector<double>>& parent_values, double x,
                           double epsilon);
double node_logpdf_row(const NodeModel& model, std::span<const double> row, double epsilon);

/// gamma_k = pi_k N_k / (sum_k pi_k N_k + epsilon).
std::vector<double> responsibilities(const NodeModel& model,
                                     const std::vector<std::vector<double>>& parent_values,
                                     double x, double epsilon);
std::vector<double> responsibilities_row(const NodeModel& model, std::span<const double> row,
                                         double epsilon);

/// Negative log-likelihood summed over rows and nodes. `data` columns must
/// include every node; they are matched by name.
double total_loss(const BnModel& bn, const Dataset& data, double epsilon);

/// Loss restricted to the listed rows of a dataset already aligned to the
/// graph's node order.
double batch_loss(const BnModel& bn, const Dataset& aligned, std::span<const std::size_t> rows,
                  double epsilon);

/// Columns of `data` reordered to the graph's node order.
Dataset align_to_graph(const Dataset& data, const Dag& dag);

/// Throws Error(invalid_argument) when a structural invariant is broken.
void validate(const BnModel& bn);

}  // namespace gmmpc
