#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mdml/dataset.hpp"
#include "mdml/encoder.hpp"
#include "mdml/evaluation.hpp"
#include "mdml/losses.hpp"
#include "mdml/sampling.hpp"
#include "mdml/trainlog.hpp"

namespace mdml {

enum class LossKind { MultiSimilarity, Triplet, Contrastive };

struct TrainConfig {
  std::uint64_t iterations = 5000;
  std::uint64_t checkpoint_every = 250;
  double lr = 1e-5;
  BatchSpec batch;
  LossKind loss = LossKind::MultiSimilarity;
  SamplingPolicy policy = SamplingPolicy::source_specific();
  std::uint64_t seed = 0;
  bool normalized_rkd = false;
  // Sources trained with the direct metric loss inside distill() instead of
  // the distillation loss; they need no specialist.
  std::vector<int> mixed_direct_sources;
  EncoderConfig encoder;
  MultiSimilarityParams multi_similarity;
  double margin = 0.2;  // triplet / contrastive

  void validate() const;
};

struct TrainResult {
  EncoderParams params;                // selected checkpoint (see selection rule)
  TrainLog log;
  std::uint64_t selected_iteration = 0;
};

// Test instrumentation: called once per iteration with the batch's source and
// the teacher used (-1 when the direct loss was applied).
struct TrainHooks {
  std::function<void(std::uint64_t iteration, int batch_source, int teacher_source)>
      on_iteration;
  // Overrides the seeded initializer when set.
  const EncoderParams* student_init = nullptr;
};

// Single-source training with the direct metric loss. Returns the checkpoint
// with the best validation Recall@1 on that source.
TrainResult train_specialist(const Dataset& dataset, int source_id,
                             const TrainConfig& config, const std::string& out_dir = "",
                             const TrainHooks& hooks = {});

// Fused-data baseline under the configured sampling policy. Returns the
// checkpoint with the best source-averaged validation Recall@1.
TrainResult train_fused(const Dataset& dataset, const TrainConfig& config,
                        const std::string& out_dir = "", const TrainHooks& hooks = {});

// Distills the frozen specialists into one student. Every iteration draws a
// single-source batch; sources listed in mixed_direct_sources get the direct
// metric loss, all others the distance-matching loss against their own
// specialist. Returns the checkpoint with the best source-averaged
// validation Recall@1.
TrainResult distill(const Dataset& dataset, const SpecialistSet& specialists,
                    const TrainConfig& config, const std::string& out_dir = "",
                    const TrainHooks& hooks = {});

// Batch reduction of the configured direct loss over a labeled batch.
LossValue direct_batch_loss(const TrainConfig& config, const std::vector<Vec>& embeddings,
                            const std::vector<int>& labels);

const char* loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

}  // namespace mdml
