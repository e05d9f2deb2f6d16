#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "gmmpc/gmmpc.h"

#ifndef GMMPC_SOURCE_DIR
#define GMMPC_SOURCE_DIR "."
#endif

namespace {

std::string fixture(const char* rel) { return std::string(GMMPC_SOURCE_DIR) + "/" + rel; }

std::string take(char* s) {
  std::string out = s ? s : "";
  gmmpc_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("graph handles") {
  gmmpc_graph* g = nullptr;
  REQUIRE(gmmpc_graph_load(fixture("data/graphs/fig1b.json").c_str(), &g) == GMMPC_OK);
  size_t n = 0;
  CHECK(gmmpc_graph_node_count(g, &n) == GMMPC_OK);
  CHECK(n == 5);
  char* out = nullptr;
  REQUIRE(gmmpc_graph_mpcs_json(g, "T", "paper", &out) == GMMPC_OK);
  CHECK(take(out) == "{\"node\":\"T\",\"mpcs\":[[\"X\",\"Y\"],[\"Z\"],[\"W\"]]}\n");
  REQUIRE(gmmpc_graph_mpcs_json(g, nullptr, "brute", &out) == GMMPC_OK);
  CHECK(take(out).find("{\"node\":\"X\",\"mpcs\":[]}") == 0);
  CHECK(gmmpc_graph_mpcs_json(g, "Q", nullptr, &out) == GMMPC_ERR_GRAPH);
  CHECK(std::string(gmmpc_last_error()).find("'Q'") != std::string::npos);
  CHECK(gmmpc_graph_mpcs_json(g, "T", "nope", &out) == GMMPC_ERR_INVALID_ARGUMENT);
  REQUIRE(gmmpc_graph_to_dot(g, &out) == GMMPC_OK);
  CHECK(take(out).find("digraph") == 0);
  gmmpc_graph_free(g);

  CHECK(gmmpc_graph_parse("{\"nodes\":[\"A\",\"B\"],\"edges\":[[\"A\",\"B\"],[\"B\",\"A\"]]}", &g) ==
        GMMPC_ERR_PARSE);
  CHECK(gmmpc_graph_load("/nonexistent.json", &g) == GMMPC_ERR_IO);
  CHECK(gmmpc_graph_load(nullptr, &g) == GMMPC_ERR_INVALID_ARGUMENT);
  gmmpc_graph_free(nullptr);
}

TEST_CASE("dataset handles") {
  gmmpc_dataset* d = nullptr;
  REQUIRE(gmmpc_dataset_parse("a,b\n1,2\n3,4\n", &d) == GMMPC_OK);
  size_t rows = 0, cols = 0;
  CHECK(gmmpc_dataset_shape(d, &rows, &cols) == GMMPC_OK);
  CHECK(rows == 2);
  CHECK(cols == 2);
  gmmpc_dataset_free(d);
  CHECK(gmmpc_dataset_parse("a,b\n1,x\n", &d) == GMMPC_ERR_DATA);
  CHECK(std::string(gmmpc_last_error()).find("line 2") != std::string::npos);
}

TEST_CASE("train, save, load, evaluate, sample, predict") {
  gmmpc_graph* g = nullptr;
  gmmpc_dataset* d = nullptr;
  REQUIRE(gmmpc_graph_load(fixture("data/sachs/sachs_pc.json").c_str(), &g) == GMMPC_OK);
  REQUIRE(gmmpc_dataset_load(fixture("data/sachs/sachs.csv").c_str(), &d) == GMMPC_OK);

  gmmpc_train_options o;
  gmmpc_train_options_init(&o);
  o.outer_iterations = 1;
  o.inner_iterations = 2;
  gmmpc_model* m = nullptr;
  char* report = nullptr;
  char* summary = nullptr;
  REQUIRE(gmmpc_train(g, d, &o, &m, &report, &summary) == GMMPC_OK);
  CHECK(take(report).find("{\"outer\":1,") == 0);
  CHECK(take(summary).find("\"epochs\": \"2×1\"") != std::string::npos);

  const auto path = (std::filesystem::temp_directory_path() / "gmmpc_capi_model.json").string();
  REQUIRE(gmmpc_model_save(m, path.c_str()) == GMMPC_OK);
  gmmpc_model* loaded = nullptr;
  REQUIRE(gmmpc_model_load(path.c_str(), &loaded) == GMMPC_OK);
  char* a = nullptr;
  char* b = nullptr;
  REQUIRE(gmmpc_model_to_json(m, &a) == GMMPC_OK);
  REQUIRE(gmmpc_model_to_json(loaded, &b) == GMMPC_OK);
  CHECK(take(a) == take(b));

  char* eval1 = nullptr;
  char* eval2 = nullptr;
  REQUIRE(gmmpc_model_eval(m, d, 0.0, &eval1) == GMMPC_OK);
  REQUIRE(gmmpc_model_eval(loaded, d, 0.0, &eval2) == GMMPC_OK);
  const auto e1 = take(eval1);
  CHECK(e1 == take(eval2));
  CHECK(e1.find("\"n_test\":7466") != std::string::npos);

  char* csv = nullptr;
  REQUIRE(gmmpc_model_sample(m, 5, 1, 1, &csv) == GMMPC_OK);
  const auto samples = take(csv);
  CHECK(samples.find("praf,pmek,plcg,PIP2,PIP3,p44/42,pakts473,PKA,PKC,P38,pjnk\n") == 0);
  CHECK(std::count(samples.begin(), samples.end(), '\n') == 6);

  REQUIRE(gmmpc_model_predict(m, d, "pakts473", 3, 1, &csv) == GMMPC_OK);
  const auto pred = take(csv);
  CHECK(pred.find("actual,predicted\n") == 0);
  CHECK(std::count(pred.begin(), pred.end(), '\n') == 7467);
  CHECK(gmmpc_model_predict(m, d, "nope", 3, 1, &csv) == GMMPC_ERR_GRAPH);

  gmmpc_model_free(loaded);
  gmmpc_model_free(m);
  std::filesystem::remove(path);

  o.optimizer = "full-em";
  o.link = "sigmoid";
  CHECK(gmmpc_train(g, d, &o, &m, nullptr, nullptr) == GMMPC_ERR_UNSUPPORTED);
  CHECK(std::string(gmmpc_last_error()).find("linear") != std::string::npos);
  o.optimizer = "adam";
  o.link = "linear";
  o.kind = "vae";
  CHECK(gmmpc_train(g, d, &o, &m, nullptr, nullptr) == GMMPC_ERR_INVALID_ARGUMENT);

  gmmpc_dataset_free(d);
  gmmpc_graph_free(g);
}

TEST_CASE("comparison through the C interface") {
  gmmpc_graph* g = nullptr;
  gmmpc_dataset* d = nullptr;
  REQUIRE(gmmpc_graph_parse(R"({"nodes":["A","B","C"],"edges":[["A","C"],["B","C"]]})", &g) == GMMPC_OK);
  std::string csv = "A,B,C\n";
  for (int i = 0; i < 60; ++i) {
    const double a = std::sin(i * 1.3), b = std::cos(i * 0.7);
    csv += std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(a - b + 0.1 * std::sin(i * 5.1)) + "\n";
  }
  REQUIRE(gmmpc_dataset_parse(csv.c_str(), &d) == GMMPC_OK);
  gmmpc_train_options o;
  gmmpc_train_options_init(&o);
  o.outer_iterations = 1;
  o.inner_iterations = 1;
  o.folds = 3;
  char* r1 = nullptr;
  char* r2 = nullptr;
  REQUIRE(gmmpc_compare(g, d, &o, "lg,gmm-mpc", &r1) == GMMPC_OK);
  REQUIRE(gmmpc_compare(g, d, &o, "lg,gmm-mpc", &r2) == GMMPC_OK);
  const auto s1 = take(r1);
  CHECK(s1 == take(r2));
  CHECK(s1.find("\"gmm-mpc\"") != std::string::npos);
  CHECK(gmmpc_compare(g, d, &o, "lg,bogus", &r1) == GMMPC_ERR_INVALID_ARGUMENT);
  gmmpc_dataset_free(d);
  gmmpc_graph_free(g);
}

TEST_CASE("version") { CHECK(std::string(gmmpc_version()).size() > 0); }
