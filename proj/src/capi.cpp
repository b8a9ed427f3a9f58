// C API over the mdml core. Exceptions are converted into status codes at
// this boundary; the message of the most recent failure is kept per thread.

#include "mdml.h"

#include <cstring>
#include <exception>
#include <string>

#include <json.hpp>

#include "mdml/config.hpp"
#include "mdml/dataset.hpp"
#include "mdml/encoder.hpp"
#include "mdml/errors.hpp"
#include "mdml/evaluation.hpp"
#include "mdml/training.hpp"

struct mdml_dataset {
  mdml::Dataset data;
};

struct mdml_model {
  mdml::Checkpoint ckpt;
};

namespace {

thread_local std::string g_last_error;

mdml_status status_from_code(mdml::ErrorCode code) {
  return static_cast<mdml_status>(static_cast<int>(code));
}

template <typename Fn>
mdml_status guarded(Fn&& fn) {
  try {
    fn();
    return MDML_OK;
  } catch (const mdml::Error& e) {
    g_last_error = e.what();
    return status_from_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MDML_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MDML_ERR_INTERNAL;
  }
}

void require_arg(bool ok, const char* message) {
  mdml::require(ok, mdml::ErrorCode::InvalidArgument, message);
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mdml::SpecialistSet build_specialist_set(const int32_t* sources,
                                         const mdml_model* const* models, int32_t n) {
  require_arg(n >= 0, "specialist count must be >= 0");
  require_arg(n == 0 || (sources != nullptr && models != nullptr),
              "specialist arrays must not be NULL");
  mdml::SpecialistSet set;
  for (int32_t i = 0; i < n; ++i) {
    require_arg(models[i] != nullptr, "specialist model must not be NULL");
    mdml::require(!set.contains(sources[i]), mdml::ErrorCode::InvalidArgument,
                  "duplicate specialist for source " + std::to_string(sources[i]));
    set.emplace(sources[i], models[i]->ckpt.params);
  }
  return set;
}

std::vector<int> build_ks(const int32_t* ks, int32_t n_ks) {
  require_arg(ks != nullptr && n_ks > 0, "ks must contain at least one value");
  return std::vector<int>(ks, ks + n_ks);
}

template <typename Runner>
mdml_status run_training(const mdml_dataset* dataset, const char* train_config_json,
                         const char* out_dir, mdml_model** out_model,
                         const Runner& runner) {
  return guarded([&] {
    require_arg(dataset != nullptr, "dataset must not be NULL");
    require_arg(train_config_json != nullptr, "train config must not be NULL");
    require_arg(out_model != nullptr, "out_model must not be NULL");
    const mdml::TrainConfig cfg = mdml::parse_train_config(train_config_json);
    const std::string dir = out_dir == nullptr ? "" : out_dir;
    mdml::TrainResult result = runner(dataset->data, cfg, dir);
    *out_model = new mdml_model{
        mdml::Checkpoint{std::move(result.params), result.selected_iteration, cfg.seed}};
  });
}

}  // namespace

extern "C" {

const char* mdml_version(void) { return "1.0.0"; }

const char* mdml_status_name(mdml_status status) {
  if (status == MDML_OK) return "ok";
  return mdml::error_code_name(static_cast<mdml::ErrorCode>(static_cast<int>(status)));
}

const char* mdml_last_error(void) { return g_last_error.c_str(); }

void mdml_string_free(char* s) { delete[] s; }

mdml_status mdml_dataset_generate(const char* gen_config_json, mdml_dataset** out_dataset) {
  return guarded([&] {
    require_arg(gen_config_json != nullptr, "gen config must not be NULL");
    require_arg(out_dataset != nullptr, "out_dataset must not be NULL");
    const mdml::GenConfig cfg = mdml::parse_gen_config(gen_config_json);
    mdml::Dataset ds = mdml::generate_synthetic(cfg.sources, cfg.input_dim, cfg.seed);
    mdml::split(ds, cfg.split_ratios, cfg.seed);
    *out_dataset = new mdml_dataset{std::move(ds)};
  });
}

mdml_status mdml_dataset_save(const mdml_dataset* dataset, const char* path) {
  return guarded([&] {
    require_arg(dataset != nullptr && path != nullptr, "dataset and path must not be NULL");
    mdml::save_dataset(dataset->data, path);
  });
}

mdml_status mdml_dataset_load(const char* path, mdml_dataset** out_dataset) {
  return guarded([&] {
    require_arg(path != nullptr && out_dataset != nullptr,
                "path and out_dataset must not be NULL");
    *out_dataset = new mdml_dataset{mdml::load_dataset(path)};
  });
}

mdml_status mdml_dataset_summary(const mdml_dataset* dataset, char** out_json) {
  return guarded([&] {
    require_arg(dataset != nullptr && out_json != nullptr,
                "dataset and out_json must not be NULL");
    *out_json = copy_string(mdml::dataset_summary_json(dataset->data));
  });
}

void mdml_dataset_free(mdml_dataset* dataset) { delete dataset; }

mdml_status mdml_model_load(const char* path, mdml_model** out_model) {
  return guarded([&] {
    require_arg(path != nullptr && out_model != nullptr,
                "path and out_model must not be NULL");
    *out_model = new mdml_model{mdml::load_checkpoint(path)};
  });
}

mdml_status mdml_model_save(const mdml_model* model, const char* path) {
  return guarded([&] {
    require_arg(model != nullptr && path != nullptr, "model and path must not be NULL");
    mdml::save_checkpoint(model->ckpt, path);
  });
}

mdml_status mdml_model_input_dim(const mdml_model* model, int32_t* out_dim) {
  return guarded([&] {
    require_arg(model != nullptr && out_dim != nullptr, "model and out_dim must not be NULL");
    *out_dim = model->ckpt.params.config.input_dim;
  });
}

mdml_status mdml_model_embed_dim(const mdml_model* model, int32_t* out_dim) {
  return guarded([&] {
    require_arg(model != nullptr && out_dim != nullptr, "model and out_dim must not be NULL");
    *out_dim = model->ckpt.params.config.embed_dim;
  });
}

mdml_status mdml_model_embed(const mdml_model* model, const double* features,
                             int32_t input_dim, double* out_embedding, int32_t embed_dim) {
  return guarded([&] {
    require_arg(model != nullptr && features != nullptr && out_embedding != nullptr,
                "model, features, and out_embedding must not be NULL");
    mdml::require(input_dim == model->ckpt.params.config.input_dim,
                  mdml::ErrorCode::Dimension, "mdml_model_embed: input_dim mismatch");
    mdml::require(embed_dim == model->ckpt.params.config.embed_dim,
                  mdml::ErrorCode::Dimension, "mdml_model_embed: embed_dim mismatch");
    const mdml::Vec x(features, features + input_dim);
    const mdml::Vec e = mdml::forward(model->ckpt.params, x);
    std::memcpy(out_embedding, e.data(), e.size() * sizeof(double));
  });
}

void mdml_model_free(mdml_model* model) { delete model; }

mdml_status mdml_train_specialist(const mdml_dataset* dataset, int32_t source_id,
                                  const char* train_config_json, const char* out_dir,
                                  mdml_model** out_model) {
  return run_training(dataset, train_config_json, out_dir, out_model,
                      [source_id](const mdml::Dataset& ds, const mdml::TrainConfig& cfg,
                                  const std::string& dir) {
                        return mdml::train_specialist(ds, source_id, cfg, dir);
                      });
}

mdml_status mdml_train_fused(const mdml_dataset* dataset, const char* train_config_json,
                             const char* out_dir, mdml_model** out_model) {
  return run_training(dataset, train_config_json, out_dir, out_model,
                      [](const mdml::Dataset& ds, const mdml::TrainConfig& cfg,
                         const std::string& dir) {
                        return mdml::train_fused(ds, cfg, dir);
                      });
}

mdml_status mdml_distill(const mdml_dataset* dataset, const int32_t* specialist_sources,
                         const mdml_model* const* specialists, int32_t n_specialists,
                         const char* train_config_json, const char* out_dir,
                         mdml_model** out_model) {
  return run_training(
      dataset, train_config_json, out_dir, out_model,
      [&](const mdml::Dataset& ds, const mdml::TrainConfig& cfg, const std::string& dir) {
        const mdml::SpecialistSet set =
            build_specialist_set(specialist_sources, specialists, n_specialists);
        return mdml::distill(ds, set, cfg, dir);
      });
}

mdml_status mdml_evaluate(const mdml_model* model, const mdml_dataset* dataset,
                          const char* split, const int32_t* ks, int32_t n_ks,
                          char** out_report_json) {
  return guarded([&] {
    require_arg(model != nullptr && dataset != nullptr && split != nullptr &&
                    out_report_json != nullptr,
                "model, dataset, split, and out_report_json must not be NULL");
    const mdml::RecallReport report =
        mdml::evaluate_model(model->ckpt.params, dataset->data,
                             mdml::split_from_name(split), build_ks(ks, n_ks));
    *out_report_json = copy_string(report.to_json());
  });
}

mdml_status mdml_eval_concat_pca(const int32_t* specialist_sources,
                                 const mdml_model* const* specialists,
                                 int32_t n_specialists, const mdml_dataset* dataset,
                                 int32_t out_dim, const char* split, const int32_t* ks,
                                 int32_t n_ks, char** out_report_json) {
  return guarded([&] {
    require_arg(dataset != nullptr && split != nullptr && out_report_json != nullptr,
                "dataset, split, and out_report_json must not be NULL");
    require_arg(out_dim >= 1, "out_dim must be >= 1");
    const mdml::SpecialistSet set =
        build_specialist_set(specialist_sources, specialists, n_specialists);
    const mdml::RecallReport report = mdml::concat_pca_baseline(
        set, dataset->data, static_cast<std::size_t>(out_dim),
        mdml::split_from_name(split), build_ks(ks, n_ks));
    *out_report_json = copy_string(report.to_json());
  });
}

mdml_status mdml_distance_ratios(const mdml_model* universal,
                                 const int32_t* specialist_sources,
                                 const mdml_model* const* specialists,
                                 int32_t n_specialists, const mdml_dataset* dataset,
                                 const char* split, char** out_stats_json) {
  return guarded([&] {
    require_arg(universal != nullptr && dataset != nullptr && split != nullptr &&
                    out_stats_json != nullptr,
                "universal, dataset, split, and out_stats_json must not be NULL");
    const mdml::SpecialistSet set =
        build_specialist_set(specialist_sources, specialists, n_specialists);
    const mdml::RatioStats stats = mdml::distance_ratio_stats(
        universal->ckpt.params, set, dataset->data, mdml::split_from_name(split));
    *out_stats_json = copy_string(stats.to_json());
  });
}

mdml_status mdml_curves_csv(const char* train_log_csv_path, char** out_csv) {
  return guarded([&] {
    require_arg(train_log_csv_path != nullptr && out_csv != nullptr,
                "train_log_csv_path and out_csv must not be NULL");
    const mdml::TrainLog log = mdml::load_train_log_csv(train_log_csv_path);
    *out_csv = copy_string(mdml::curves_to_csv(log));
  });
}

mdml_status mdml_overfit_summary(const char* train_log_csv_path, char** out_json) {
  return guarded([&] {
    require_arg(train_log_csv_path != nullptr && out_json != nullptr,
                "train_log_csv_path and out_json must not be NULL");
    const mdml::TrainLog log = mdml::load_train_log_csv(train_log_csv_path);
    nlohmann::json doc;
    doc["schema_version"] = 1;
    nlohmann::json sources = nlohmann::json::array();
    for (const mdml::OverfitPoint& p : mdml::overfit_curves(log)) {
      sources.push_back(nlohmann::json{{"source_id", p.source_id},
                                       {"peak_iteration", p.peak_iteration},
                                       {"peak_recall1", p.peak_recall1},
                                       {"final_recall1", p.final_recall1}});
    }
    doc["sources"] = sources;
    *out_json = copy_string(doc.dump(2));
  });
}

}  // extern "C"
