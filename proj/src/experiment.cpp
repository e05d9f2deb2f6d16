#include "gmmpc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

#include <nlohmann/json.hpp>

#include "gmmpc/error.hpp"

namespace gmmpc {

MeanVariance mean_variance(std::span<const double> values) {
  MeanVariance mv;
  if (values.empty()) return mv;
  for (double v : values) mv.mean += v;
  mv.mean /= static_cast<double>(values.size());
  for (double v : values) mv.variance += (v - mv.mean) * (v - mv.mean);
  mv.variance /= static_cast<double>(values.size());
  return mv;
}

TrainResult train_normalized(const Dag& dag, const Dataset& raw_train,
                             const ExperimentConfig& config, const EpochCallback& on_epoch) {
  const Dataset aligned = align_to_graph(raw_train, dag);
  BnModel bn = build_model(dag, config.kind, config.link, config.gmm_branches);
  config.train.validate(config.link);

  if (!config.early_stopping) {
    const Dataset train = zscore_fit_transform(aligned);
    bn.normalization = train.norm_stats();
    return dio_train(std::move(bn), train, config.train, nullptr, on_epoch);
  }

  // Carve a seeded validation slice out of the training rows.
  const std::size_t n = aligned.rows();
  std::size_t n_val = static_cast<std::size_t>(std::round(config.validation_fraction * n));
  n_val = std::clamp<std::size_t>(n_val, 1, n > 1 ? n - 1 : 1);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(mix_seed(config.train.seed, 0x76616cULL));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> val_rows(perm.begin(), perm.begin() + n_val);
  std::vector<std::size_t> fit_rows(perm.begin() + n_val, perm.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(fit_rows.begin(), fit_rows.end());

  const Dataset train = zscore_fit_transform(aligned.subset(fit_rows));
  const Dataset val = zscore_apply(*train.norm_stats(), aligned.subset(val_rows));
  bn.normalization = train.norm_stats();
  return dio_train(std::move(bn), train, config.train, &val, on_epoch);
}

CrossValidation cross_validate(const Dag& dag, const Dataset& raw, const ExperimentConfig& config) {
  const Dataset aligned = align_to_graph(raw, dag);
  const auto folds = kfold_split(aligned.rows(), config.folds, config.train.seed);

  std::vector<std::future<FoldResult>> jobs;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    jobs.push_back(std::async(std::launch::async, [&, f] {
      ExperimentConfig cfg = config;
      cfg.train.seed = mix_seed(config.train.seed, 1000 + f);
      const Dataset train = aligned.subset(folds[f].train);
      TrainResult trained = train_normalized(dag, train, cfg);
      const Dataset test = zscore_apply(*trained.model.normalization, aligned.subset(folds[f].test));
      FoldResult fr;
      fr.fold = f;
      fr.eval = evaluate(trained.model, test, config.eval_epsilon);
      fr.report = std::move(trained.report);
      return fr;
    }));
  }

  CrossValidation cv;
  cv.kind = config.kind;
  cv.param_count = param_count(build_model(dag, config.kind, config.link, config.gmm_branches));
  std::vector<double> nll;
  std::vector<double> bics;
  for (auto& j : jobs) {
    cv.folds.push_back(j.get());
    nll.push_back(cv.folds.back().eval.avg_minus_loglik);
    bics.push_back(cv.folds.back().eval.bic);
  }
  cv.avg_minus_loglik = mean_variance(nll);
  cv.bic = mean_variance(bics);
  return cv;
}

Comparison compare_models(const Dag& dag, const Dataset& raw, const ExperimentConfig& config,
                          std::span<const ModelKind> kinds) {
  Comparison cmp;
  for (ModelKind kind : kinds) {
    ExperimentConfig cfg = config;
    cfg.kind = kind;
    cmp.rows.push_back(cross_validate(dag, raw, cfg));
  }
  return cmp;
}

std::string to_json(const Comparison& cmp, const Dag& dag, const ExperimentConfig& config) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["nodes"] = dag.size();
  doc["edges"] = dag.edges().size();
  doc["link"] = to_string(config.link);
  doc["folds"] = config.folds;
  doc["seed"] = config.train.seed;
  doc["optimizer"] = to_string(config.train.optimizer);
  doc["epochs"] = std::to_string(config.train.inner_iterations) + "×" +
                  std::to_string(config.train.outer_iterations);
  doc["batch_size"] = config.train.batch_size;
  doc["learning_rate"] = config.train.learning_rate;
  doc["epsilon"] = config.train.epsilon;
  doc["early_stopping"] = config.early_stopping;
  auto rows = ordered_json::array();
  for (const auto& cv : cmp.rows) {
    ordered_json row;
    row["kind"] = to_string(cv.kind);
    row["param_count"] = cv.param_count;
    auto folds_nll = ordered_json::array();
    auto folds_bic = ordered_json::array();
    auto folds_epochs = ordered_json::array();
    for (const auto& f : cv.folds) {
      folds_nll.push_back(f.eval.avg_minus_loglik);
      folds_bic.push_back(f.eval.bic);
      folds_epochs.push_back(f.report.best_outer_epoch);
    }
    row["avg_minus_loglik"] = {{"mean", cv.avg_minus_loglik.mean},
                               {"variance", cv.avg_minus_loglik.variance},
                               {"folds", folds_nll}};
    row["bic"] = {{"mean", cv.bic.mean}, {"variance", cv.bic.variance}, {"folds", folds_bic}};
    row["best_outer_epoch"] = folds_epochs;
    rows.push_back(std::move(row));
  }
  doc["models"] = std::move(rows);
  return doc.dump(2) + "\n";
}

}  // namespace gmmpc
