#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmmpc/data.hpp"
#include "gmmpc/model.hpp"

namespace gmmpc {

enum class Optimizer { adam, full_em };

Optimizer parse_optimizer(std::string_view s);
std::string_view to_string(Optimizer o);

struct TrainConfig {
  std::size_t outer_iterations = 4;
  /// Passes over the training data per outer epoch (each pass is a sequence
  /// of mini-batch Adam steps).
  std::size_t inner_iterations = 20;
  std::size_t batch_size = 3000;
  double learning_rate = 0.005;
  double epsilon = kDefaultEpsilon;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  Optimizer optimizer = Optimizer::adam;
  /// Outer epochs without validation improvement before stopping. Only used
  /// when a validation set is given.
  std::size_t patience = 3;

  void validate(Link link) const;
};

struct TrainReport {
  std::vector<double> loss_per_outer_epoch;
  std::vector<double> val_avg_nll_per_outer_epoch;
  std::string epochs;  // "inner×outer"
  double final_train_loss = 0.0;
  double wall_time_seconds = 0.0;
  std::size_t best_outer_epoch = 0;  // 1-based; 0 when no epoch ran
  bool stopped_early = false;
};

/// Flat parameter layout: for each node, for each branch, the weights, then
/// the bias, then the log-variance. Mixture coefficients are not included.
std::vector<double> pack_parameters(const BnModel& bn);
void unpack_parameters(BnModel& bn, std::span<const double> flat);
std::size_t parameter_count_flat(const BnModel& bn);
/// e.g. "node 'T' branch 1 bias".
std::string describe_parameter(const BnModel& bn, std::size_t index);

/// Gradient of batch_loss with respect to the packed parameters.
std::vector<double> loss_gradient(const BnModel& bn, const Dataset& aligned,
                                  std::span<const std::size_t> rows, double epsilon);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

struct AdamSettings {
  double learning_rate = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void adam_step(std::span<double> params, AdamState& state, std::span<const double> gradient,
               const AdamSettings& settings);

/// Row-major N x K_i matrix per node.
struct Responsibilities {
  std::size_t rows = 0;
  std::vector<std::vector<double>> per_node;

  double at(NodeId v, std::size_t row, std::size_t k) const;
};

Responsibilities compute_responsibilities(const BnModel& bn, const Dataset& aligned, double epsilon);

/// pi_k <- (1/N) sum_j gamma_jk over the whole dataset, then renormalised to
/// the simplex (a no-op when epsilon = 0).
void em_pi_update(BnModel& bn, const Dataset& aligned, double epsilon);

/// Weighted least squares for (w, b) on the augmented design [p, 1], then the
/// weighted residual variance, floored at kVarianceFloor. Linear link only.
/// Branches with negligible total responsibility are left unchanged.
void closed_form_mstep(BnModel& bn, const Dataset& aligned, const Responsibilities& gamma);

/// Double Iteration Optimization driver. Holds exclusive access to the model.
class DioTrainer {
 public:
  DioTrainer(BnModel& bn, const Dataset& train, TrainConfig config);

  /// Outer-epoch first half: EM coefficient update on the full data.
  void update_coefficients();
  /// Outer-epoch second half: inner passes of mini-batch Adam over w, b and
  /// log-variance with pi frozen, or one closed-form M-step for full-em.
  void descend();
  void outer_epoch();

  double loss(double epsilon) const;
  const Dataset& data() const { return data_; }
  const TrainConfig& config() const { return config_; }

 private:
  BnModel& bn_;
  Dataset data_;
  TrainConfig config_;
  AdamState adam_;
  std::uint64_t pass_ = 0;
  std::vector<std::size_t> all_rows_;
};

struct EpochRecord {
  std::size_t outer = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> val_avg_nll;
};

struct TrainResult {
  BnModel model;
  TrainReport report;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs config.outer_iterations outer epochs. With a validation set, stops
/// after `patience` epochs without improvement and restores the best model.
TrainResult dio_train(BnModel bn, const Dataset& data, const TrainConfig& config,
                      const Dataset* validation = nullptr, const EpochCallback& on_epoch = {});

}  // namespace gmmpc
