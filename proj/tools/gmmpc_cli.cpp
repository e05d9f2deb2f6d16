// gmmpc command-line tool. Talks to the library only through gmmpc.h.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gmmpc/gmmpc.h"

namespace fs = std::filesystem;

namespace {

struct CliError {
  int code;
  std::string message;
};

// Owns a string handed out by the C API.
struct CString {
  char* p = nullptr;
  ~CString() { gmmpc_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

void check(gmmpc_status s) {
  if (s != GMMPC_OK) throw CliError{static_cast<int>(s), gmmpc_last_error()};
}

struct Graph {
  gmmpc_graph* h = nullptr;
  explicit Graph(const std::string& path) { check(gmmpc_graph_load(path.c_str(), &h)); }
  ~Graph() { gmmpc_graph_free(h); }
};

struct Data {
  gmmpc_dataset* h = nullptr;
  explicit Data(const std::string& path) { check(gmmpc_dataset_load(path.c_str(), &h)); }
  ~Data() { gmmpc_dataset_free(h); }
};

struct Model {
  gmmpc_model* h = nullptr;
  Model() = default;
  explicit Model(const std::string& path) { check(gmmpc_model_load(path.c_str(), &h)); }
  ~Model() { gmmpc_model_free(h); }
};

// Every setting the subcommands understand. Unset optionals fall back to the
// config file, then to library defaults.
struct Settings {
  std::optional<std::string> config;
  std::optional<std::string> graph, data, model, node, backend, kinds, predict;
  std::optional<std::string> kind, link, optimizer, output_dir;
  std::optional<std::size_t> gmm_branches, outer, inner, batch_size, folds, patience, count;
  std::optional<double> learning_rate, epsilon, eval_epsilon, validation_fraction;
  std::optional<double> adam_beta1, adam_beta2, adam_eps;
  std::optional<std::uint64_t> seed;
  std::optional<bool> early_stopping;
  bool normalized = false;
};

template <typename T>
void fill(std::optional<T>& slot, const nlohmann::json& doc, const char* key) {
  if (!slot && doc.contains(key) && !doc[key].is_null()) slot = doc[key].get<T>();
}

void merge_config_file(Settings& s) {
  if (!s.config) return;
  std::ifstream in(*s.config);
  if (!in) throw CliError{GMMPC_ERR_IO, "cannot open config file '" + *s.config + "'"};
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CliError{GMMPC_ERR_PARSE, *s.config + ": " + e.what()};
  }
  if (!doc.is_object()) throw CliError{GMMPC_ERR_PARSE, *s.config + ": expected a JSON object"};
  // Relative paths in the config resolve against the config file location.
  const fs::path base = fs::path(*s.config).parent_path();
  auto resolve = [&](std::optional<std::string>& slot, const char* key) {
    if (slot || !doc.contains(key)) return;
    fs::path p = doc[key].get<std::string>();
    slot = (p.is_relative() ? base / p : p).lexically_normal().string();
  };
  try {
    resolve(s.graph, "graph");
    resolve(s.data, "data");
    resolve(s.model, "model");
    resolve(s.output_dir, "output_dir");
    fill(s.kind, doc, "kind");
    fill(s.link, doc, "link");
    fill(s.optimizer, doc, "optimizer");
    fill(s.kinds, doc, "kinds");
    fill(s.gmm_branches, doc, "gmm_branches");
    fill(s.outer, doc, "outer_iterations");
    fill(s.inner, doc, "inner_iterations");
    fill(s.batch_size, doc, "batch_size");
    fill(s.folds, doc, "folds");
    fill(s.patience, doc, "patience");
    fill(s.learning_rate, doc, "learning_rate");
    fill(s.epsilon, doc, "epsilon");
    fill(s.eval_epsilon, doc, "eval_epsilon");
    fill(s.validation_fraction, doc, "validation_fraction");
    fill(s.adam_beta1, doc, "adam_beta1");
    fill(s.adam_beta2, doc, "adam_beta2");
    fill(s.adam_eps, doc, "adam_eps");
    fill(s.seed, doc, "seed");
    fill(s.early_stopping, doc, "early_stopping");
  } catch (const nlohmann::json::exception& e) {
    throw CliError{GMMPC_ERR_PARSE, *s.config + ": " + e.what()};
  }
}

gmmpc_train_options options_from(const Settings& s) {
  gmmpc_train_options o;
  gmmpc_train_options_init(&o);
  if (s.kind) o.kind = s.kind->c_str();
  if (s.link) o.link = s.link->c_str();
  if (s.optimizer) o.optimizer = s.optimizer->c_str();
  if (s.gmm_branches) o.gmm_branches = *s.gmm_branches;
  if (s.outer) o.outer_iterations = *s.outer;
  if (s.inner) o.inner_iterations = *s.inner;
  if (s.batch_size) o.batch_size = *s.batch_size;
  if (s.folds) o.folds = *s.folds;
  if (s.patience) o.patience = *s.patience;
  if (s.learning_rate) o.learning_rate = *s.learning_rate;
  if (s.epsilon) o.epsilon = *s.epsilon;
  if (s.eval_epsilon) o.eval_epsilon = *s.eval_epsilon;
  if (s.validation_fraction) o.validation_fraction = *s.validation_fraction;
  if (s.adam_beta1) o.adam_beta1 = *s.adam_beta1;
  if (s.adam_beta2) o.adam_beta2 = *s.adam_beta2;
  if (s.adam_eps) o.adam_eps = *s.adam_eps;
  if (s.seed) o.seed = *s.seed;
  if (s.early_stopping) o.early_stopping = *s.early_stopping ? 1 : 0;
  return o;
}

const std::string& need(const std::optional<std::string>& v, const char* flag) {
  if (!v) throw CliError{GMMPC_ERR_INVALID_ARGUMENT, std::string("missing required ") + flag};
  return *v;
}

fs::path output_dir(const Settings& s) {
  fs::path dir = s.output_dir.value_or(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError{GMMPC_ERR_IO, "cannot create output directory '" + dir.string() + "'"};
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw CliError{GMMPC_ERR_IO, "cannot write '" + path.string() + "'"};
}

void add_training_flags(CLI::App* cmd, Settings& s) {
  cmd->add_option("--kind", s.kind, "lg, gmm or gmm-mpc");
  cmd->add_option("--link", s.link, "linear or sigmoid");
  cmd->add_option("--optimizer", s.optimizer, "adam or full-em");
  cmd->add_option("--gmm-branches", s.gmm_branches, "branches per node for the gmm kind");
  cmd->add_option("--outer", s.outer, "outer iterations");
  cmd->add_option("--inner", s.inner, "inner iterations (passes over the data)");
  cmd->add_option("--batch-size", s.batch_size, "mini-batch size");
  cmd->add_option("--lr", s.learning_rate, "Adam learning rate");
  cmd->add_option("--adam-beta1", s.adam_beta1);
  cmd->add_option("--adam-beta2", s.adam_beta2);
  cmd->add_option("--adam-eps", s.adam_eps);
  cmd->add_option("--early-stopping", s.early_stopping,
                  "stop on a held-out slice of the training data");
  cmd->add_option("--patience", s.patience, "outer epochs without improvement");
  cmd->add_option("--validation-fraction", s.validation_fraction);
}

int run_mpc(const Settings& s) {
  Graph g(need(s.graph, "--graph"));
  CString out;
  check(gmmpc_graph_mpcs_json(g.h, s.node ? s.node->c_str() : nullptr,
                              s.backend ? s.backend->c_str() : nullptr, &out.p));
  std::cout << out.str();
  return 0;
}

int run_train(const Settings& s) {
  Graph g(need(s.graph, "--graph"));
  Data d(need(s.data, "--data"));
  const auto opts = options_from(s);
  Model m;
  CString report;
  CString summary;
  check(gmmpc_train(g.h, d.h, &opts, &m.h, &report.p, &summary.p));
  const fs::path dir = output_dir(s);
  check(gmmpc_model_save(m.h, (dir / "model.json").string().c_str()));
  write_file(dir / "train_report.jsonl", report.str());
  write_file(dir / "train_summary.json", summary.str());
  std::cout << summary.str();
  return 0;
}

int run_eval(const Settings& s) {
  Model m(need(s.model, "--model"));
  Data d(need(s.data, "--data"));
  CString result;
  check(gmmpc_model_eval(m.h, d.h, s.eval_epsilon.value_or(0.0), &result.p));
  const fs::path dir = output_dir(s);
  write_file(dir / "eval.json", result.str() + "\n");
  std::cout << result.str() << "\n";
  if (s.predict) {
    CString csv;
    check(gmmpc_model_predict(m.h, d.h, s.predict->c_str(), s.seed.value_or(0),
                              s.normalized ? 0 : 1, &csv.p));
    write_file(dir / "predictions.csv", csv.str());
  }
  return 0;
}

int run_sample(const Settings& s) {
  Model m(need(s.model, "--model"));
  CString csv;
  check(gmmpc_model_sample(m.h, s.count.value_or(1000), s.seed.value_or(0), s.normalized ? 0 : 1,
                           &csv.p));
  write_file(output_dir(s) / "samples.csv", csv.str());
  return 0;
}

int run_compare(const Settings& s) {
  Graph g(need(s.graph, "--graph"));
  Data d(need(s.data, "--data"));
  const auto opts = options_from(s);
  CString report;
  check(gmmpc_compare(g.h, d.h, &opts, s.kinds ? s.kinds->c_str() : nullptr, &report.p));
  write_file(output_dir(s) / "compare.json", report.str());

  const auto doc = nlohmann::json::parse(report.str());
  std::printf("%-8s %8s %22s %26s\n", "model", "params", "avg -loglik (mean±var)",
              "BIC (mean±var)");
  for (const auto& row : doc["models"]) {
    std::printf("%-8s %8zu %13.4f ± %-7.4f %16.1f ± %-9.1f\n",
                row["kind"].get<std::string>().c_str(), row["param_count"].get<std::size_t>(),
                row["avg_minus_loglik"]["mean"].get<double>(),
                row["avg_minus_loglik"]["variance"].get<double>(),
                row["bic"]["mean"].get<double>(), row["bic"]["variance"].get<double>());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian mixture Bayesian networks over maximal parental cliques"};
  app.require_subcommand(1);
  app.fallthrough();
  Settings s;
  app.add_option("--config", s.config, "JSON run configuration; flags override it");
  app.add_option("--seed", s.seed, "random seed");
  app.add_option("--epsilon", s.epsilon, "stabiliser inside the mixture logarithm");
  app.add_option("--output-dir", s.output_dir, "directory for written artifacts");

  auto* mpc = app.add_subcommand("mpc", "list maximal parental cliques");
  mpc->add_option("--graph", s.graph, "graph JSON file");
  mpc->add_option("--node", s.node, "only this node");
  mpc->add_option("--backend", s.backend, "paper, fast or brute");

  auto* train = app.add_subcommand("train", "train one model on a CSV dataset");
  train->add_option("--graph", s.graph, "graph JSON file");
  train->add_option("--data", s.data, "CSV dataset");
  add_training_flags(train, s);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a CSV dataset");
  eval->add_option("--model", s.model, "checkpoint written by train");
  eval->add_option("--data", s.data, "CSV dataset in raw units");
  eval->add_option("--eval-epsilon", s.eval_epsilon, "epsilon used for evaluation (default 0)");
  eval->add_option("--predict", s.predict, "also write actual/predicted CSV for this node");
  eval->add_flag("--normalized", s.normalized, "keep predictions in normalised units");

  auto* sample = app.add_subcommand("sample", "ancestral sampling from a checkpoint");
  sample->add_option("--model", s.model, "checkpoint written by train");
  sample->add_option("--count", s.count, "number of rows (default 1000)");
  sample->add_flag("--normalized", s.normalized, "write normalised units");

  auto* compare = app.add_subcommand("compare", "cross-validate lg, gmm and gmm-mpc");
  compare->add_option("--graph", s.graph, "graph JSON file");
  compare->add_option("--data", s.data, "CSV dataset");
  compare->add_option("--kinds", s.kinds, "comma separated model kinds");
  compare->add_option("--folds", s.folds, "number of folds (default 5)");
  compare->add_option("--eval-epsilon", s.eval_epsilon, "epsilon used for evaluation");
  add_training_flags(compare, s);

  CLI11_PARSE(app, argc, argv);

  try {
    merge_config_file(s);
    if (*mpc) return run_mpc(s);
    if (*train) return run_train(s);
    if (*eval) return run_eval(s);
    if (*sample) return run_sample(s);
    if (*compare) return run_compare(s);
  } catch (const CliError& e) {
    std::cerr << "gmmpc: " << e.message << "\n";
    return e.code == 0 ? 1 : e.code;
  } catch (const std::exception& e) {
    std::cerr << "gmmpc: " << e.what() << "\n";
    return GMMPC_ERR_INTERNAL;
  }
  return 1;
}
