#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gmmpc/data.hpp"
#include "gmmpc/eval.hpp"
#include "gmmpc/graph.hpp"
#include "gmmpc/model.hpp"
#include "gmmpc/optim.hpp"

namespace gmmpc {

struct ExperimentConfig {
  ModelKind kind = ModelKind::gmm_mpc;
  Link link = Link::linear;
  std::size_t gmm_branches = kDefaultGmmBranches;
  TrainConfig train;
  std::size_t folds = 5;
  /// Hold out a slice of each training fold and stop on its avg NLL.
  bool early_stopping = false;
  double validation_fraction = 0.1;
  double eval_epsilon = 0.0;
};

struct FoldResult {
  std::size_t fold = 0;
  EvalResult eval;
  TrainReport report;
};

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;  // population variance across folds
};

MeanVariance mean_variance(std::span<const double> values);

struct CrossValidation {
  ModelKind kind = ModelKind::gmm_mpc;
  std::size_t param_count = 0;
  std::vector<FoldResult> folds;
  MeanVariance avg_minus_loglik;
  MeanVariance bic;
};

/// Trains a model on z-scored data (statistics from the training rows only).
/// Returns the trained model with its normalisation attached.
TrainResult train_normalized(const Dag& dag, const Dataset& raw_train,
                             const ExperimentConfig& config,
                             const EpochCallback& on_epoch = {});

/// k-fold cross-validation of one model kind. Fold splits depend only on
/// config.train.seed, so different kinds see identical folds.
CrossValidation cross_validate(const Dag& dag, const Dataset& raw, const ExperimentConfig& config);

struct Comparison {
  std::vector<CrossValidation> rows;
};

Comparison compare_models(const Dag& dag, const Dataset& raw, const ExperimentConfig& config,
                          std::span<const ModelKind> kinds);

/// Deterministic report (no timings).
std::string to_json(const Comparison& cmp, const Dag& dag, const ExperimentConfig& config);

}  // namespace gmmpc
