/* C interface to libgmmpc.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a gmmpc_status; on
 * failure gmmpc_last_error() describes what went wrong (per thread). Strings
 * returned through char** out-parameters are heap allocated and must be
 * released with gmmpc_string_free. */
#ifndef GMMPC_GMMPC_H
#define GMMPC_GMMPC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(GMMPC_BUILDING)
#    define GMMPC_API __declspec(dllexport)
#  else
#    define GMMPC_API __declspec(dllimport)
#  endif
#else
#  define GMMPC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gmmpc_status {
  GMMPC_OK = 0,
  GMMPC_ERR_INVALID_ARGUMENT = 1,
  GMMPC_ERR_PARSE = 2,
  GMMPC_ERR_GRAPH = 3,
  GMMPC_ERR_DATA = 4,
  GMMPC_ERR_NUMERIC = 5,
  GMMPC_ERR_IO = 6,
  GMMPC_ERR_UNSUPPORTED = 7,
  GMMPC_ERR_INTERNAL = 99
} gmmpc_status;

typedef struct gmmpc_graph gmmpc_graph;
typedef struct gmmpc_dataset gmmpc_dataset;
typedef struct gmmpc_model gmmpc_model;

typedef struct gmmpc_train_options {
  const char* kind;      /* "lg", "gmm" or "gmm-mpc" */
  const char* link;      /* "linear" or "sigmoid" */
  const char* optimizer; /* "adam" or "full-em" */
  size_t gmm_branches;
  size_t outer_iterations;
  size_t inner_iterations;
  size_t batch_size;
  double learning_rate;
  double epsilon;
  uint64_t seed;
  double adam_beta1;
  double adam_beta2;
  double adam_eps;
  size_t patience;
  int early_stopping;
  double validation_fraction;
  size_t folds;
  double eval_epsilon;
} gmmpc_train_options;

/* Defaults: gmm-mpc, linear, adam, 3 gmm branches, 20x4 epochs, batch 3000,
 * learning rate 0.005, epsilon 1e-8, seed 0, betas 0.9/0.999, adam eps
 * 1e-8, patience 3, no early stopping, 5 folds, evaluation epsilon 0. */
GMMPC_API void gmmpc_train_options_init(gmmpc_train_options* options);

GMMPC_API const char* gmmpc_version(void);
GMMPC_API const char* gmmpc_last_error(void);
GMMPC_API void gmmpc_string_free(char* s);

GMMPC_API gmmpc_status gmmpc_graph_load(const char* path, gmmpc_graph** out);
GMMPC_API gmmpc_status gmmpc_graph_parse(const char* json_text, gmmpc_graph** out);
GMMPC_API void gmmpc_graph_free(gmmpc_graph* graph);
GMMPC_API gmmpc_status gmmpc_graph_node_count(const gmmpc_graph* graph, size_t* out);
GMMPC_API gmmpc_status gmmpc_graph_to_dot(const gmmpc_graph* graph, char** out);
/* One JSON object per line, {"node": "T", "mpcs": [["X","Y"],["Z"],["W"]]},
 * for `node` or for every node when `node` is NULL. `backend` is "paper",
 * "fast" or "brute" (NULL means fast). */
GMMPC_API gmmpc_status gmmpc_graph_mpcs_json(const gmmpc_graph* graph, const char* node,
                                             const char* backend, char** out);

GMMPC_API gmmpc_status gmmpc_dataset_load(const char* path, gmmpc_dataset** out);
GMMPC_API gmmpc_status gmmpc_dataset_parse(const char* csv_text, gmmpc_dataset** out);
GMMPC_API void gmmpc_dataset_free(gmmpc_dataset* data);
GMMPC_API gmmpc_status gmmpc_dataset_shape(const gmmpc_dataset* data, size_t* rows, size_t* cols);

/* Z-scores `data` (raw units), trains, and returns the model with its
 * normalisation. report_jsonl / summary_json may be NULL. */
GMMPC_API gmmpc_status gmmpc_train(const gmmpc_graph* graph, const gmmpc_dataset* data,
                                   const gmmpc_train_options* options, gmmpc_model** model,
                                   char** report_jsonl, char** summary_json);

GMMPC_API gmmpc_status gmmpc_model_save(const gmmpc_model* model, const char* path);
GMMPC_API gmmpc_status gmmpc_model_load(const char* path, gmmpc_model** out);
GMMPC_API gmmpc_status gmmpc_model_to_json(const gmmpc_model* model, char** out);
GMMPC_API void gmmpc_model_free(gmmpc_model* model);

/* EvalResult JSON. `data` is in raw units; the model's stored normalisation
 * is applied first. */
GMMPC_API gmmpc_status gmmpc_model_eval(const gmmpc_model* model, const gmmpc_dataset* data,
                                        double epsilon, char** result_json);
/* CSV with the graph's column names. */
GMMPC_API gmmpc_status gmmpc_model_sample(const gmmpc_model* model, size_t count, uint64_t seed,
                                          int denormalize, char** csv);
/* Two-column CSV (actual,predicted) for `node`, drawing it from its parents
 * in each row of `data`. */
GMMPC_API gmmpc_status gmmpc_model_predict(const gmmpc_model* model, const gmmpc_dataset* data,
                                           const char* node, uint64_t seed, int denormalize,
                                           char** csv);

/* Cross-validates each kind in the comma separated `kinds` list (NULL means
 * "lg,gmm,gmm-mpc") on identical folds and returns the comparison JSON. */
GMMPC_API gmmpc_status gmmpc_compare(const gmmpc_graph* graph, const gmmpc_dataset* data,
                                     const gmmpc_train_options* options, const char* kinds,
                                     char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* GMMPC_GMMPC_H */
