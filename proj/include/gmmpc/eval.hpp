#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmmpc/data.hpp"
#include "gmmpc/model.hpp"

namespace gmmpc {

struct EvalResult {
  double avg_minus_loglik = 0.0;
  double bic = 0.0;
  std::size_t param_count = 0;
  std::size_t n_test = 0;
};

/// total_loss / N. Evaluation defaults to epsilon = 0.
double avg_minus_loglik(const BnModel& bn, const Dataset& test, double epsilon = 0.0);

/// Free parameters: per branch |w| + 2 (bias, variance), plus K - 1 mixture
/// coefficients per node.
std::size_t param_count(const BnModel& bn);

/// avg * n + p ln(n) / 2
double bic(double avg_minus_loglik, std::size_t param_count, std::size_t n_test);

EvalResult evaluate(const BnModel& bn, const Dataset& test, double epsilon = 0.0);
std::string to_json(const EvalResult& result);

/// Tracks a validation metric (lower is better) across outer epochs.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);

  /// Records the next epoch's value. Returns true when training should stop.
  bool update(double value);
  /// True if the last update() was a new best.
  bool improved() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }  // 1-based
  double best_value() const { return best_; }
  std::size_t epochs() const { return epoch_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t since_best_ = 0;
  double best_ = 0.0;
  bool improved_ = false;
};

struct StopDecision {
  bool stop = false;
  std::size_t stop_epoch = 0;  // 1-based epoch after which training stops
  std::size_t best_epoch = 0;  // 1-based
};

/// Replays a whole trace through EarlyStopping.
StopDecision early_stopping(std::span<const double> trace, std::size_t patience);

/// Ancestral sampling in normalised space; columns follow the graph order.
Dataset sample(const BnModel& bn, std::size_t count, std::uint64_t seed);

/// Draws `node` for each row of `parent_rows` (which must contain the node's
/// parents by name), branch first and then the Gaussian.
std::vector<double> predict_node(const BnModel& bn, NodeId node, const Dataset& parent_rows,
                                 std::uint64_t seed);

}  // namespace gmmpc
