/* mdml — multi-domain metric learning toolkit.
 *
 * C interface to the training, distillation, and evaluation core. All
 * functions return MDML_OK on success; on failure they return an error code
 * and leave a human-readable message retrievable with mdml_last_error().
 * Objects returned through out-parameters are owned by the caller and must
 * be released with the matching *_free function. Strings returned through
 * out-parameters must be released with mdml_string_free().
 */
#ifndef MDML_H
#define MDML_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mdml_status {
  MDML_OK = 0,
  MDML_ERR_INVALID_ARGUMENT = 1,
  MDML_ERR_DIMENSION = 2,
  MDML_ERR_DEGENERATE_INPUT = 3,
  MDML_ERR_SAMPLING = 4,
  MDML_ERR_IO = 5,
  MDML_ERR_FORMAT = 6,
  MDML_ERR_DIVERGED = 7,
  MDML_ERR_MISSING_SPECIALIST = 8,
  MDML_ERR_INTERNAL = 9
} mdml_status;

typedef struct mdml_dataset mdml_dataset; /* opaque */
typedef struct mdml_model mdml_model;     /* opaque */

const char* mdml_version(void);

/* Stable machine-parsable name of a status code, e.g. "sampling_error". */
const char* mdml_status_name(mdml_status status);

/* Message describing the most recent failure on this thread. */
const char* mdml_last_error(void);

void mdml_string_free(char* s);

/* ---- datasets -------------------------------------------------------- */

/* Generate a synthetic multi-source dataset from a JSON config (see the
 * repository documentation for the schema) and split it. */
mdml_status mdml_dataset_generate(const char* gen_config_json, mdml_dataset** out_dataset);

mdml_status mdml_dataset_save(const mdml_dataset* dataset, const char* path);
mdml_status mdml_dataset_load(const char* path, mdml_dataset** out_dataset);

/* JSON summary: sources, sizes, split counts. */
mdml_status mdml_dataset_summary(const mdml_dataset* dataset, char** out_json);

void mdml_dataset_free(mdml_dataset* dataset);

/* ---- models ---------------------------------------------------------- */

mdml_status mdml_model_load(const char* path, mdml_model** out_model);
mdml_status mdml_model_save(const mdml_model* model, const char* path);

mdml_status mdml_model_input_dim(const mdml_model* model, int32_t* out_dim);
mdml_status mdml_model_embed_dim(const mdml_model* model, int32_t* out_dim);

/* Embed one feature vector into a unit-norm embedding. out_embedding must
 * hold embed_dim doubles. */
mdml_status mdml_model_embed(const mdml_model* model, const double* features,
                             int32_t input_dim, double* out_embedding,
                             int32_t embed_dim);

void mdml_model_free(mdml_model* model);

/* ---- training -------------------------------------------------------- */

/* Each trainer parses a JSON train config, writes ckpt_<iteration> files,
 * log.csv, and selected.ckpt under out_dir (when out_dir is non-NULL and
 * non-empty), and returns the selected model. */

mdml_status mdml_train_specialist(const mdml_dataset* dataset, int32_t source_id,
                                  const char* train_config_json, const char* out_dir,
                                  mdml_model** out_model);

mdml_status mdml_train_fused(const mdml_dataset* dataset, const char* train_config_json,
                             const char* out_dir, mdml_model** out_model);

/* specialists[i] teaches source specialist_sources[i]. Sources listed in the
 * config's direct_sources are trained with the direct metric loss and need
 * no specialist. */
mdml_status mdml_distill(const mdml_dataset* dataset, const int32_t* specialist_sources,
                         const mdml_model* const* specialists, int32_t n_specialists,
                         const char* train_config_json, const char* out_dir,
                         mdml_model** out_model);

/* ---- evaluation ------------------------------------------------------ */

/* Per-source leave-one-out Recall@k on the given split ("train", "val",
 * "test"); returns the report as JSON. */
mdml_status mdml_evaluate(const mdml_model* model, const mdml_dataset* dataset,
                          const char* split, const int32_t* ks, int32_t n_ks,
                          char** out_report_json);

/* Concatenation + PCA ensemble baseline over the given specialists. */
mdml_status mdml_eval_concat_pca(const int32_t* specialist_sources,
                                 const mdml_model* const* specialists,
                                 int32_t n_specialists, const mdml_dataset* dataset,
                                 int32_t out_dim, const char* split, const int32_t* ks,
                                 int32_t n_ks, char** out_report_json);

/* Distribution of d_universal / d_specialist over within-source pairs,
 * bucketed into intra-/inter-class; returns the stats as JSON. */
mdml_status mdml_distance_ratios(const mdml_model* universal,
                                 const int32_t* specialist_sources,
                                 const mdml_model* const* specialists,
                                 int32_t n_specialists, const mdml_dataset* dataset,
                                 const char* split, char** out_stats_json);

/* Long-form curve rows (iteration,source_id,metric,value) derived from a
 * training log.csv. */
mdml_status mdml_curves_csv(const char* train_log_csv_path, char** out_csv);

/* Peak/final validation Recall@1 per source from a training log.csv,
 * as JSON. */
mdml_status mdml_overfit_summary(const char* train_log_csv_path, char** out_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MDML_H */
