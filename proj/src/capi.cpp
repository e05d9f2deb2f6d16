#include "gmmpc/gmmpc.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "gmmpc/checkpoint.hpp"
#include "gmmpc/data.hpp"
#include "gmmpc/error.hpp"
#include "gmmpc/eval.hpp"
#include "gmmpc/experiment.hpp"
#include "gmmpc/graph.hpp"
#include "gmmpc/model.hpp"
#include "gmmpc/mpc.hpp"

struct gmmpc_graph {
  gmmpc::Dag dag;
};

struct gmmpc_dataset {
  gmmpc::Dataset data;
};

struct gmmpc_model {
  gmmpc::BnModel bn;
};

namespace {

thread_local std::string last_error;

gmmpc_status to_status(gmmpc::ErrorCode code) {
  return static_cast<gmmpc_status>(static_cast<int>(code));
}

template <typename F>
gmmpc_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return GMMPC_OK;
  } catch (const gmmpc::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GMMPC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GMMPC_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw gmmpc::Error(gmmpc::ErrorCode::invalid_argument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

gmmpc::ExperimentConfig to_config(const gmmpc_train_options* o) {
  gmmpc::ExperimentConfig c;
  if (o->kind) c.kind = gmmpc::parse_kind(o->kind);
  if (o->link) c.link = gmmpc::parse_link(o->link);
  if (o->optimizer) c.train.optimizer = gmmpc::parse_optimizer(o->optimizer);
  c.gmm_branches = o->gmm_branches;
  c.train.outer_iterations = o->outer_iterations;
  c.train.inner_iterations = o->inner_iterations;
  c.train.batch_size = o->batch_size;
  c.train.learning_rate = o->learning_rate;
  c.train.epsilon = o->epsilon;
  c.train.seed = o->seed;
  c.train.adam_beta1 = o->adam_beta1;
  c.train.adam_beta2 = o->adam_beta2;
  c.train.adam_eps = o->adam_eps;
  c.train.patience = o->patience;
  c.early_stopping = o->early_stopping != 0;
  c.validation_fraction = o->validation_fraction;
  c.folds = o->folds;
  c.eval_epsilon = o->eval_epsilon;
  if (c.gmm_branches < 1)
    throw gmmpc::Error(gmmpc::ErrorCode::invalid_argument, "gmm_branches must be >= 1");
  if (c.early_stopping && c.train.patience < 1)
    throw gmmpc::Error(gmmpc::ErrorCode::invalid_argument, "patience must be >= 1");
  if (c.early_stopping && !(c.validation_fraction > 0.0 && c.validation_fraction < 1.0))
    throw gmmpc::Error(gmmpc::ErrorCode::invalid_argument,
                       "validation_fraction must lie in (0, 1)");
  c.train.validate(c.link);
  return c;
}

gmmpc::Dataset normalized_for(const gmmpc::BnModel& bn, const gmmpc::Dataset& raw) {
  if (bn.normalization) return gmmpc::zscore_apply(*bn.normalization, raw);
  return gmmpc::align_to_graph(raw, bn.dag);
}

}  // namespace

extern "C" {

void gmmpc_train_options_init(gmmpc_train_options* o) {
  if (!o) return;
  o->kind = "gmm-mpc";
  o->link = "linear";
  o->optimizer = "adam";
  o->gmm_branches = gmmpc::kDefaultGmmBranches;
  o->outer_iterations = 4;
  o->inner_iterations = 20;
  o->batch_size = 3000;
  o->learning_rate = 0.005;
  o->epsilon = gmmpc::kDefaultEpsilon;
  o->seed = 0;
  o->adam_beta1 = 0.9;
  o->adam_beta2 = 0.999;
  o->adam_eps = 1e-8;
  o->patience = 3;
  o->early_stopping = 0;
  o->validation_fraction = 0.1;
  o->folds = 5;
  o->eval_epsilon = 0.0;
}

const char* gmmpc_version(void) { return "1.0.0"; }

const char* gmmpc_last_error(void) { return last_error.c_str(); }

void gmmpc_string_free(char* s) { std::free(s); }

gmmpc_status gmmpc_graph_load(const char* path, gmmpc_graph** out) {
  return guarded([&] {
    require(path && out, "gmmpc_graph_load: null argument");
    *out = new gmmpc_graph{gmmpc::load_graph(path)};
  });
}

gmmpc_status gmmpc_graph_parse(const char* json_text, gmmpc_graph** out) {
  return guarded([&] {
    require(json_text && out, "gmmpc_graph_parse: null argument");
    *out = new gmmpc_graph{gmmpc::parse_graph(json_text)};
  });
}

void gmmpc_graph_free(gmmpc_graph* graph) { delete graph; }

gmmpc_status gmmpc_graph_node_count(const gmmpc_graph* graph, size_t* out) {
  return guarded([&] {
    require(graph && out, "gmmpc_graph_node_count: null argument");
    *out = graph->dag.size();
  });
}

gmmpc_status gmmpc_graph_to_dot(const gmmpc_graph* graph, char** out) {
  return guarded([&] {
    require(graph && out, "gmmpc_graph_to_dot: null argument");
    *out = dup_string(gmmpc::to_dot(graph->dag));
  });
}

gmmpc_status gmmpc_graph_mpcs_json(const gmmpc_graph* graph, const char* node, const char* backend,
                                   char** out) {
  return guarded([&] {
    require(graph && out, "gmmpc_graph_mpcs_json: null argument");
    const auto b = backend ? gmmpc::parse_backend(backend) : gmmpc::MpcBackend::fast;
    const auto& dag = graph->dag;
    std::string text;
    if (node) {
      const auto v = dag.id(node);
      text = gmmpc::mpc_json(dag, gmmpc::find_mpcs(dag, v, b)) + "\n";
    } else {
      for (gmmpc::NodeId v = 0; v < dag.size(); ++v)
        text += gmmpc::mpc_json(dag, gmmpc::find_mpcs(dag, v, b)) + "\n";
    }
    *out = dup_string(text);
  });
}

gmmpc_status gmmpc_dataset_load(const char* path, gmmpc_dataset** out) {
  return guarded([&] {
    require(path && out, "gmmpc_dataset_load: null argument");
    *out = new gmmpc_dataset{gmmpc::load_csv_file(path)};
  });
}

gmmpc_status gmmpc_dataset_parse(const char* csv_text, gmmpc_dataset** out) {
  return guarded([&] {
    require(csv_text && out, "gmmpc_dataset_parse: null argument");
    *out = new gmmpc_dataset{gmmpc::load_csv(csv_text)};
  });
}

void gmmpc_dataset_free(gmmpc_dataset* data) { delete data; }

gmmpc_status gmmpc_dataset_shape(const gmmpc_dataset* data, size_t* rows, size_t* cols) {
  return guarded([&] {
    require(data && rows && cols, "gmmpc_dataset_shape: null argument");
    *rows = data->data.rows();
    *cols = data->data.cols();
  });
}

gmmpc_status gmmpc_train(const gmmpc_graph* graph, const gmmpc_dataset* data,
                         const gmmpc_train_options* options, gmmpc_model** model,
                         char** report_jsonl, char** summary_json) {
  return guarded([&] {
    require(graph && data && options && model, "gmmpc_train: null argument");
    const auto config = to_config(options);
    auto result = gmmpc::train_normalized(graph->dag, data->data, config);
    std::string jsonl = gmmpc::report_jsonl(result.report);
    std::string summary = gmmpc::report_summary_json(result.report);
    auto* handle = new gmmpc_model{std::move(result.model)};
    char* r = nullptr;
    char* s = nullptr;
    try {
      if (report_jsonl) r = dup_string(jsonl);
      if (summary_json) s = dup_string(summary);
    } catch (...) {
      std::free(r);
      delete handle;
      throw;
    }
    *model = handle;
    if (report_jsonl) *report_jsonl = r;
    if (summary_json) *summary_json = s;
  });
}

gmmpc_status gmmpc_model_save(const gmmpc_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "gmmpc_model_save: null argument");
    gmmpc::save_checkpoint(model->bn, path);
  });
}

gmmpc_status gmmpc_model_load(const char* path, gmmpc_model** out) {
  return guarded([&] {
    require(path && out, "gmmpc_model_load: null argument");
    *out = new gmmpc_model{gmmpc::load_checkpoint(path)};
  });
}

gmmpc_status gmmpc_model_to_json(const gmmpc_model* model, char** out) {
  return guarded([&] {
    require(model && out, "gmmpc_model_to_json: null argument");
    *out = dup_string(gmmpc::checkpoint_json(model->bn));
  });
}

void gmmpc_model_free(gmmpc_model* model) { delete model; }

gmmpc_status gmmpc_model_eval(const gmmpc_model* model, const gmmpc_dataset* data, double epsilon,
                              char** result_json) {
  return guarded([&] {
    require(model && data && result_json, "gmmpc_model_eval: null argument");
    const auto test = normalized_for(model->bn, data->data);
    *result_json = dup_string(gmmpc::to_json(gmmpc::evaluate(model->bn, test, epsilon)));
  });
}

gmmpc_status gmmpc_model_sample(const gmmpc_model* model, size_t count, uint64_t seed,
                                int denormalize, char** csv) {
  return guarded([&] {
    require(model && csv, "gmmpc_model_sample: null argument");
    auto drawn = gmmpc::sample(model->bn, count, seed);
    if (denormalize && model->bn.normalization)
      drawn = gmmpc::zscore_inverse(*model->bn.normalization, drawn);
    *csv = dup_string(gmmpc::to_csv(drawn));
  });
}

gmmpc_status gmmpc_model_predict(const gmmpc_model* model, const gmmpc_dataset* data,
                                 const char* node, uint64_t seed, int denormalize, char** csv) {
  return guarded([&] {
    require(model && data && node && csv, "gmmpc_model_predict: null argument");
    const auto& bn = model->bn;
    const auto v = bn.dag.id(node);
    const auto rows = normalized_for(bn, data->data);
    auto predicted = gmmpc::predict_node(bn, v, rows, seed);
    std::vector<double> values;
    values.reserve(2 * rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) {
      double actual = rows.at(r, v);
      double pred = predicted[r];
      if (denormalize && bn.normalization) {
        actual = actual * bn.normalization->stddev[v] + bn.normalization->mean[v];
        pred = pred * bn.normalization->stddev[v] + bn.normalization->mean[v];
      }
      values.push_back(actual);
      values.push_back(pred);
    }
    *csv = dup_string(gmmpc::to_csv(gmmpc::Dataset({"actual", "predicted"}, std::move(values))));
  });
}

gmmpc_status gmmpc_compare(const gmmpc_graph* graph, const gmmpc_dataset* data,
                           const gmmpc_train_options* options, const char* kinds,
                           char** report_json) {
  return guarded([&] {
    require(graph && data && options && report_json, "gmmpc_compare: null argument");
    const auto config = to_config(options);
    std::vector<gmmpc::ModelKind> list;
    std::stringstream ss(kinds ? kinds : "lg,gmm,gmm-mpc");
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) list.push_back(gmmpc::parse_kind(item));
    require(!list.empty(), "gmmpc_compare: no model kinds given");
    const auto cmp = gmmpc::compare_models(graph->dag, data->data, config, list);
    *report_json = dup_string(gmmpc::to_json(cmp, graph->dag, config));
  });
}

}  // extern "C"
