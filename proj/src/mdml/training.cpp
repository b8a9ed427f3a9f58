#include "mdml/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "mdml/adam.hpp"
#include "mdml/errors.hpp"

namespace mdml {

namespace {

namespace fs = std::filesystem;

// Fused label space: class identities from different sources are never
// merged, so a label is the (source, class) pair folded into one int.
int fused_label(const Sample& sample) {
  return sample.source_id * 1000000 + sample.class_id;
}

struct EngineSetup {
  enum class Mode { Direct, Distill } mode = Mode::Direct;
  SourceRegistry registry;              // view over the dataset's samples
  const SpecialistSet* specialists = nullptr;
  // Direct runs return their best-validation checkpoint; distillation does
  // not overfit early, so it returns the final one.
  bool select_final = false;
};

LossValue batch_triplet_loss(const std::vector<Vec>& embeddings,
                             const std::vector<int>& labels, double margin) {
  const std::size_t n = embeddings.size();
  LossValue total;
  total.grad_embeddings.assign(n, Vec(embeddings[0].size(), 0.0));
  std::size_t count = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      for (std::size_t q = 0; q < n; ++q) {
        if (labels[q] == labels[a]) continue;
        const LossValue one = triplet_loss(embeddings[a], embeddings[p], embeddings[q], margin);
        total.value += one.value;
        for (std::size_t k = 0; k < embeddings[0].size(); ++k) {
          total.grad_embeddings[a][k] += one.grad_embeddings[0][k];
          total.grad_embeddings[p][k] += one.grad_embeddings[1][k];
          total.grad_embeddings[q][k] += one.grad_embeddings[2][k];
        }
        ++count;
      }
    }
  }
  if (count == 0) return total;
  total.value /= static_cast<double>(count);
  for (Vec& g : total.grad_embeddings) {
    for (double& v : g) v /= static_cast<double>(count);
  }
  return total;
}

LossValue batch_contrastive_loss(const std::vector<Vec>& embeddings,
                                 const std::vector<int>& labels, double margin) {
  const std::size_t n = embeddings.size();
  LossValue total;
  total.grad_embeddings.assign(n, Vec(embeddings[0].size(), 0.0));
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const LossValue one =
          contrastive_loss(embeddings[i], embeddings[j], labels[i] == labels[j], margin);
      total.value += one.value;
      for (std::size_t k = 0; k < embeddings[0].size(); ++k) {
        total.grad_embeddings[i][k] += one.grad_embeddings[0][k];
        total.grad_embeddings[j][k] += one.grad_embeddings[1][k];
      }
      ++count;
    }
  }
  if (count == 0) return total;
  total.value /= static_cast<double>(count);
  for (Vec& g : total.grad_embeddings) {
    for (double& v : g) v /= static_cast<double>(count);
  }
  return total;
}

double validation_recall1(const EncoderParams& params, const Dataset& dataset,
                          const SourceRegistry& registry, std::size_t src_index) {
  const std::vector<std::size_t>& indices = registry.splits[src_index].val;
  require(indices.size() >= 2, ErrorCode::InvalidArgument,
          "training: validation split too small for source " +
              std::to_string(registry.sources[src_index].source_id));
  std::vector<Vec> embeddings;
  std::vector<int> labels;
  embeddings.reserve(indices.size());
  labels.reserve(indices.size());
  for (std::size_t idx : indices) {
    embeddings.push_back(forward(params, dataset.samples[idx].features));
    labels.push_back(dataset.samples[idx].class_id);
  }
  return recall_at_k(embeddings, labels, {1})[0];
}

TrainResult run_engine(const Dataset& dataset, const TrainConfig& config,
                       const EngineSetup& setup, const std::string& out_dir,
                       const TrainHooks& hooks) {
  config.validate();
  require(config.encoder.input_dim == dataset.input_dim, ErrorCode::Dimension,
          "training: encoder input_dim does not match dataset");

  if (!out_dir.empty()) fs::create_directories(out_dir);

  Rng rng(config.seed);
  const std::uint64_t init_seed = rng.next_u64();
  EncoderParams params = hooks.student_init ? *hooks.student_init
                                            : init_params(config.encoder, init_seed);
  require(params.config == config.encoder, ErrorCode::InvalidArgument,
          "training: student_init config does not match the train config");

  AdamState adam(params.values.size(), config.lr);
  TrainResult result;
  double best_metric = -1.0;
  double loss_accum = 0.0;
  std::uint64_t window = 0;

  for (std::uint64_t iter = 1; iter <= config.iterations; ++iter) {
    MiniBatch batch;
    if (config.policy.kind == PolicyKind::Naive) {
      batch = sample_naive_batch(setup.registry, dataset, config.batch, rng);
    } else {
      const int source = choose_source(setup.registry, config.policy, rng);
      batch = sample_batch(setup.registry, dataset, config.batch, source, rng);
    }

    std::vector<Vec> inputs;
    std::vector<int> labels;
    inputs.reserve(batch.indices.size());
    labels.reserve(batch.indices.size());
    for (std::size_t idx : batch.indices) {
      inputs.push_back(dataset.samples[idx].features);
      labels.push_back(fused_label(dataset.samples[idx]));
    }
    const std::vector<Vec> embeddings = forward_batch(params, inputs);

    const auto compute_loss = [&](int& teacher_source) {
      if (setup.mode == EngineSetup::Mode::Distill) {
        const int source = *batch.source_id;
        const bool direct = std::find(config.mixed_direct_sources.begin(),
                                      config.mixed_direct_sources.end(),
                                      source) != config.mixed_direct_sources.end();
        if (!direct) {
          const auto it = setup.specialists->find(source);
          require(it != setup.specialists->end(), ErrorCode::MissingSpecialist,
                  "distill: no specialist for source " + std::to_string(source));
          const std::vector<Vec> teacher_emb = forward_batch(it->second, inputs);
          teacher_source = source;
          return rkd_loss(make_batch_distances(teacher_emb), embeddings,
                          config.normalized_rkd);
        }
      }
      return direct_batch_loss(config, embeddings, labels);
    };

    LossValue loss;
    int teacher_source = -1;
    try {
      loss = compute_loss(teacher_source);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Diverged) {
        fail(ErrorCode::Diverged,
             std::string(e.what()) + " at iteration " + std::to_string(iter));
      }
      throw;
    }
    require(std::isfinite(loss.value), ErrorCode::Diverged,
            "training: non-finite loss at iteration " + std::to_string(iter));

    const std::vector<double> grads = backward(params, inputs, loss.grad_embeddings);
    adam_step(params.values, grads, adam);
    loss_accum += loss.value;
    window += 1;

    if (hooks.on_iteration) {
      hooks.on_iteration(iter, batch.source_id ? *batch.source_id : -1, teacher_source);
    }

    if (iter % config.checkpoint_every == 0) {
      const double loss_avg = loss_accum / static_cast<double>(window);
      loss_accum = 0.0;
      window = 0;

      double metric_sum = 0.0;
      for (std::size_t si = 0; si < setup.registry.n_sources(); ++si) {
        const double r1 = validation_recall1(params, dataset, setup.registry, si);
        metric_sum += r1;
        result.log.rows.push_back(TrainLogRow{iter, setup.registry.sources[si].source_id,
                                              r1, loss_avg});
      }
      const double metric = metric_sum / static_cast<double>(setup.registry.n_sources());

      if (!out_dir.empty()) {
        save_checkpoint(Checkpoint{params, iter, config.seed},
                        out_dir + "/ckpt_" + std::to_string(iter));
      }
      if (setup.select_final ? iter == config.iterations : metric > best_metric) {
        best_metric = metric;
        result.params = params;
        result.selected_iteration = iter;
      }
    }
  }

  if (config.iterations == 0 || result.selected_iteration == 0) {
    result.params = params;
    result.selected_iteration = config.iterations;
  }
  if (!out_dir.empty()) {
    save_train_log_csv(result.log, out_dir + "/log.csv");
    save_checkpoint(Checkpoint{result.params, result.selected_iteration, config.seed},
                    out_dir + "/selected.ckpt");
  }
  return result;
}

SourceRegistry single_source_view(const Dataset& dataset, int source_id) {
  const int src_index = dataset.registry.index_of(source_id);
  require(src_index >= 0, ErrorCode::InvalidArgument,
          "training: source " + std::to_string(source_id) + " not in dataset");
  SourceRegistry view;
  view.sources = {dataset.registry.sources[static_cast<std::size_t>(src_index)]};
  view.splits = {dataset.registry.splits[static_cast<std::size_t>(src_index)]};
  return view;
}

}  // namespace

void TrainConfig::validate() const {
  require(checkpoint_every >= 1, ErrorCode::InvalidArgument,
          "TrainConfig: checkpoint_every must be >= 1");
  require(iterations % checkpoint_every == 0, ErrorCode::InvalidArgument,
          "TrainConfig: iterations must be a multiple of checkpoint_every");
  require(lr > 0.0, ErrorCode::InvalidArgument, "TrainConfig: lr must be positive");
  batch.validate();
  policy.validate();
  encoder.validate();
}

LossValue direct_batch_loss(const TrainConfig& config, const std::vector<Vec>& embeddings,
                            const std::vector<int>& labels) {
  switch (config.loss) {
    case LossKind::Triplet:
      return batch_triplet_loss(embeddings, labels, config.margin);
    case LossKind::Contrastive:
      return batch_contrastive_loss(embeddings, labels, config.margin);
    default:
      return multi_similarity_loss(embeddings, labels, config.multi_similarity);
  }
}

TrainResult train_specialist(const Dataset& dataset, int source_id,
                             const TrainConfig& config, const std::string& out_dir,
                             const TrainHooks& hooks) {
  EngineSetup setup;
  setup.mode = EngineSetup::Mode::Direct;
  setup.registry = single_source_view(dataset, source_id);
  TrainConfig cfg = config;
  // A one-source run chooses that source every iteration regardless of policy.
  if (cfg.policy.kind == PolicyKind::Naive) cfg.policy = SamplingPolicy::source_specific();
  return run_engine(dataset, cfg, setup, out_dir, hooks);
}

TrainResult train_fused(const Dataset& dataset, const TrainConfig& config,
                        const std::string& out_dir, const TrainHooks& hooks) {
  require(dataset.registry.n_sources() >= 1, ErrorCode::InvalidArgument,
          "train_fused: dataset has no sources");
  EngineSetup setup;
  setup.mode = EngineSetup::Mode::Direct;
  setup.registry = dataset.registry;
  return run_engine(dataset, config, setup, out_dir, hooks);
}

TrainResult distill(const Dataset& dataset, const SpecialistSet& specialists,
                    const TrainConfig& config, const std::string& out_dir,
                    const TrainHooks& hooks) {
  require(config.policy.kind != PolicyKind::Naive, ErrorCode::InvalidArgument,
          "distill: batches must be single-source; the naive policy is not usable");
  for (const SourceSpec& spec : dataset.registry.sources) {
    const bool direct = std::find(config.mixed_direct_sources.begin(),
                                  config.mixed_direct_sources.end(),
                                  spec.source_id) != config.mixed_direct_sources.end();
    if (direct) continue;
    require(specialists.contains(spec.source_id), ErrorCode::MissingSpecialist,
            "distill: no specialist for source " + std::to_string(spec.source_id));
  }
  for (const auto& [source_id, params] : specialists) {
    require(params.config.input_dim == dataset.input_dim, ErrorCode::Dimension,
            "distill: specialist input_dim does not match dataset for source " +
                std::to_string(source_id));
  }
  EngineSetup setup;
  setup.mode = EngineSetup::Mode::Distill;
  setup.registry = dataset.registry;
  setup.specialists = &specialists;
  setup.select_final = true;
  return run_engine(dataset, config, setup, out_dir, hooks);
}

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::Triplet: return "triplet";
    case LossKind::Contrastive: return "contrastive";
    default: return "multi_similarity";
  }
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "multi_similarity") return LossKind::MultiSimilarity;
  if (name == "triplet") return LossKind::Triplet;
  if (name == "contrastive") return LossKind::Contrastive;
  fail(ErrorCode::InvalidArgument, "unknown loss: " + name);
}

}  // namespace mdml
