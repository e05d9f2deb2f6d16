#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "gmmpc/checkpoint.hpp"
#include "gmmpc/error.hpp"
#include "gmmpc/experiment.hpp"
#include "support.hpp"

using namespace gmmpc;

TEST_CASE("checkpoint round trip is exact") {
  auto bn = testing_support::collider_truth();
  bn.normalization = NormStats{{"A", "B", "C"}, {0.1, 2.0, -3.0}, {1.5, 0.25, 4.0}};
  const auto text = checkpoint_json(bn);
  auto back = parse_checkpoint(text);
  CHECK(checkpoint_json(back) == text);
  CHECK(back.nodes[2].pi == bn.nodes[2].pi);
  CHECK(back.nodes[2].branches[1].log_var == bn.nodes[2].branches[1].log_var);
  CHECK(back.normalization->stddev == bn.normalization->stddev);

  auto doc = nlohmann::json::parse(text);
  CHECK(doc["nodes"][2]["mpcs"] == nlohmann::json::parse(R"([["A"],["B"]])"));
  CHECK(doc["nodes"][2]["branches"][0]["variance"].get<double>() == doctest::Approx(0.2));

  const auto path = (std::filesystem::temp_directory_path() / "gmmpc_ckpt_test.json").string();
  save_checkpoint(bn, path);
  CHECK(checkpoint_json(load_checkpoint(path)) == text);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint errors") {
  CHECK_THROWS_AS(parse_checkpoint("{"), Error);
  CHECK_THROWS_AS(parse_checkpoint(R"({"format": "other"})"), Error);
  auto doc = nlohmann::json::parse(checkpoint_json(testing_support::collider_truth()));
  doc["nodes"][0]["branches"][0]["variance"] = -1.0;
  doc["nodes"][0]["branches"][0].erase("log_variance");
  CHECK_THROWS_AS(parse_checkpoint(doc.dump()), Error);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/model.json"), Error);
}

TEST_CASE("report lines") {
  TrainReport r;
  r.loss_per_outer_epoch = {3.5, 2.25};
  r.val_avg_nll_per_outer_epoch = {1.5};
  CHECK(report_jsonl(r) ==
        "{\"outer\":1,\"train_loss\":3.5,\"val_avg_nll\":1.5}\n"
        "{\"outer\":2,\"train_loss\":2.25,\"val_avg_nll\":null}\n");
  auto summary = nlohmann::json::parse(report_summary_json(r));
  CHECK(summary.contains("wall_time_seconds"));
}

TEST_CASE("mean and population variance") {
  std::vector<double> v{1, 2, 3, 4};
  auto mv = mean_variance(v);
  CHECK(mv.mean == 2.5);
  CHECK(mv.variance == 1.25);
}

TEST_CASE("normalised training attaches training statistics") {
  auto raw = testing_support::collider_data(400, 3);
  ExperimentConfig cfg;
  cfg.train.outer_iterations = 2;
  cfg.train.inner_iterations = 3;
  cfg.train.batch_size = 100;
  auto r = train_normalized(testing_support::collider_truth().dag, raw, cfg);
  REQUIRE(r.model.normalization);
  auto z = zscore_fit_transform(raw);
  CHECK(r.model.normalization->mean == z.norm_stats()->mean);
  CHECK(r.report.loss_per_outer_epoch.size() == 2);

  // Evaluating on the training data reproduces the final training loss (epsilon matched).
  CHECK(avg_minus_loglik(r.model, z, cfg.train.epsilon) * raw.rows() ==
        doctest::Approx(r.report.final_train_loss).epsilon(1e-12));

  cfg.early_stopping = true;
  cfg.train.outer_iterations = 10;
  auto es = train_normalized(testing_support::collider_truth().dag, raw, cfg);
  CHECK(es.report.val_avg_nll_per_outer_epoch.size() == es.report.loss_per_outer_epoch.size());
  CHECK(es.report.best_outer_epoch >= 1);
}

TEST_CASE("cross validation and comparison") {
  auto raw = testing_support::collider_data(300, 9);
  const auto dag = testing_support::collider_truth().dag;
  ExperimentConfig cfg;
  cfg.train.outer_iterations = 2;
  cfg.train.inner_iterations = 2;
  cfg.train.batch_size = 64;
  cfg.folds = 3;
  const std::vector<ModelKind> kinds{ModelKind::lg, ModelKind::gmm, ModelKind::gmm_mpc};
  auto a = compare_models(dag, raw, cfg, kinds);
  REQUIRE(a.rows.size() == 3);
  for (const auto& row : a.rows) {
    CHECK(row.folds.size() == 3);
    std::size_t n = 0;
    for (const auto& f : row.folds) {
      n += f.eval.n_test;
      CHECK(std::abs(f.eval.bic - bic(f.eval.avg_minus_loglik, f.eval.param_count, f.eval.n_test)) < 1e-9);
    }
    CHECK(n == raw.rows());
  }
  CHECK(a.rows[0].param_count == 2 + 2 + 4);
  CHECK(a.rows[2].param_count == 2 + 2 + 7);

  auto b = compare_models(dag, raw, cfg, kinds);
  CHECK(to_json(a, dag, cfg) == to_json(b, dag, cfg));
  auto doc = nlohmann::json::parse(to_json(a, dag, cfg));
  CHECK(doc["models"].size() == 3);
  CHECK(doc["models"][2]["kind"] == "gmm-mpc");

  cfg.folds = 1;
  CHECK_THROWS_AS(cross_validate(dag, raw, cfg), Error);
}
