#include "mdml/config.hpp"

#include <json.hpp>

#include "mdml/errors.hpp"

namespace mdml {

namespace {

using nlohmann::json;

json parse_document(const std::string& text, const char* what) {
  json doc = json::parse(text, nullptr, false);
  require(!doc.is_discarded(), ErrorCode::InvalidArgument,
          std::string(what) + ": malformed JSON");
  require(doc.is_object(), ErrorCode::InvalidArgument,
          std::string(what) + ": expected a JSON object");
  const int version = doc.value("schema_version", 1);
  require(version == 1, ErrorCode::Format,
          std::string(what) + ": unsupported schema_version");
  return doc;
}

template <typename T>
T field_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::InvalidArgument, std::string("config: bad value for '") + key + "'");
  }
}

}  // namespace

GenConfig parse_gen_config(const std::string& json_text) {
  const json doc = parse_document(json_text, "gen config");
  GenConfig cfg;
  cfg.input_dim = field_or(doc, "input_dim", cfg.input_dim);
  cfg.seed = field_or(doc, "seed", cfg.seed);
  if (doc.contains("split_ratios")) {
    const auto ratios = field_or(doc, "split_ratios", std::vector<double>{2, 1, 1});
    require(ratios.size() == 3, ErrorCode::InvalidArgument,
            "gen config: split_ratios must have exactly 3 entries");
    cfg.split_ratios = {ratios[0], ratios[1], ratios[2]};
  }
  require(doc.contains("sources") && doc.at("sources").is_array() &&
              !doc.at("sources").empty(),
          ErrorCode::InvalidArgument, "gen config: 'sources' array is required");
  for (const json& entry : doc.at("sources")) {
    require(entry.is_object(), ErrorCode::InvalidArgument,
            "gen config: each source must be an object");
    SourceSpec spec;
    spec.source_id = field_or(entry, "source_id", spec.source_id);
    spec.n_classes = field_or(entry, "n_classes", spec.n_classes);
    spec.samples_per_class = field_or(entry, "samples_per_class", spec.samples_per_class);
    spec.cluster_spread = field_or(entry, "cluster_spread", spec.cluster_spread);
    spec.inter_class_separation =
        field_or(entry, "inter_class_separation", spec.inter_class_separation);
    spec.difficulty_drift = field_or(entry, "difficulty_drift", spec.difficulty_drift);
    spec.validate();
    cfg.sources.push_back(spec);
  }
  return cfg;
}

TrainConfig parse_train_config(const std::string& json_text) {
  const json doc = parse_document(json_text, "train config");
  TrainConfig cfg;
  cfg.iterations = field_or(doc, "iterations", cfg.iterations);
  cfg.checkpoint_every = field_or(doc, "checkpoint_every", cfg.checkpoint_every);
  cfg.lr = field_or(doc, "lr", cfg.lr);
  cfg.seed = field_or(doc, "seed", cfg.seed);
  cfg.normalized_rkd = field_or(doc, "normalized_rkd", cfg.normalized_rkd);
  cfg.mixed_direct_sources =
      field_or(doc, "direct_sources", cfg.mixed_direct_sources);
  cfg.margin = field_or(doc, "margin", cfg.margin);
  cfg.loss = loss_kind_from_name(
      field_or<std::string>(doc, "loss", loss_kind_name(cfg.loss)));

  if (doc.contains("batch")) {
    const json& batch = doc.at("batch");
    cfg.batch.classes_per_batch =
        field_or(batch, "classes_per_batch", cfg.batch.classes_per_batch);
    cfg.batch.samples_per_class =
        field_or(batch, "samples_per_class", cfg.batch.samples_per_class);
  }

  cfg.policy.kind = policy_kind_from_name(
      field_or<std::string>(doc, "policy", policy_kind_name(cfg.policy.kind)));
  cfg.policy.boost_factor = field_or(doc, "boost_factor", cfg.policy.boost_factor);
  cfg.policy.boosted_sources = field_or(doc, "boosted_sources", cfg.policy.boosted_sources);

  if (doc.contains("encoder")) {
    const json& enc = doc.at("encoder");
    cfg.encoder.input_dim = field_or(enc, "input_dim", cfg.encoder.input_dim);
    cfg.encoder.hidden_dims = field_or(enc, "hidden_dims", cfg.encoder.hidden_dims);
    cfg.encoder.embed_dim = field_or(enc, "embed_dim", cfg.encoder.embed_dim);
    cfg.encoder.activation = activation_from_name(
        field_or<std::string>(enc, "activation", activation_name(cfg.encoder.activation)));
  }

  if (doc.contains("multi_similarity")) {
    const json& ms = doc.at("multi_similarity");
    cfg.multi_similarity.alpha = field_or(ms, "alpha", cfg.multi_similarity.alpha);
    cfg.multi_similarity.beta = field_or(ms, "beta", cfg.multi_similarity.beta);
    cfg.multi_similarity.lambda = field_or(ms, "lambda", cfg.multi_similarity.lambda);
    cfg.multi_similarity.mining_margin =
        field_or(ms, "mining_margin", cfg.multi_similarity.mining_margin);
  }

  cfg.validate();
  return cfg;
}

std::string dataset_summary_json(const Dataset& dataset) {
  json doc;
  doc["schema_version"] = 1;
  doc["input_dim"] = dataset.input_dim;
  doc["n_samples"] = dataset.samples.size();
  json sources = json::array();
  for (std::size_t si = 0; si < dataset.registry.n_sources(); ++si) {
    const SourceSpec& spec = dataset.registry.sources[si];
    const SourceSplits& splits = dataset.registry.splits[si];
    sources.push_back(json{{"source_id", spec.source_id},
                           {"n_classes", spec.n_classes},
                           {"samples_per_class", spec.samples_per_class},
                           {"cluster_spread", spec.cluster_spread},
                           {"inter_class_separation", spec.inter_class_separation},
                           {"difficulty_drift", spec.difficulty_drift},
                           {"train", splits.train.size()},
                           {"val", splits.val.size()},
                           {"test", splits.test.size()}});
  }
  doc["sources"] = sources;
  return doc.dump(2);
}

}  // namespace mdml
