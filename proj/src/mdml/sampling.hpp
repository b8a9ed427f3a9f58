#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdml/dataset.hpp"
#include "mdml/rng.hpp"

namespace mdml {

// c classes per batch, k samples per class. The stock configuration is
// k = 5 with batch size 130, i.e. c = 26.
struct BatchSpec {
  int classes_per_batch = 26;
  int samples_per_class = 5;

  int batch_size() const { return classes_per_batch * samples_per_class; }
  void validate() const;
};

enum class PolicyKind { Naive, SourceSpecific, SourceBalanced, Boosted };

struct SamplingPolicy {
  PolicyKind kind = PolicyKind::SourceSpecific;
  // Boosted only: multiplies the train-size weight of each listed source.
  double boost_factor = 1.0;
  std::vector<int> boosted_sources;

  static SamplingPolicy naive() { return {PolicyKind::Naive, 1.0, {}}; }
  static SamplingPolicy source_specific() { return {PolicyKind::SourceSpecific, 1.0, {}}; }
  static SamplingPolicy source_balanced() { return {PolicyKind::SourceBalanced, 1.0, {}}; }
  static SamplingPolicy boosted(double factor, std::vector<int> sources) {
    return {PolicyKind::Boosted, factor, std::move(sources)};
  }
  void validate() const;
};

struct MiniBatch {
  std::vector<std::size_t> indices;      // into Dataset::samples
  std::optional<int> source_id;          // set for single-source batches
};

// Source-choice probabilities implied by a policy over the registry's train
// splits. Not defined for the Naive policy.
std::vector<double> source_probabilities(const SourceRegistry& registry,
                                         const SamplingPolicy& policy);

// Draw a source id according to the policy.
int choose_source(const SourceRegistry& registry, const SamplingPolicy& policy, Rng& rng);

// Single-source batch: c distinct classes uniformly without replacement, then
// k train samples per class without replacement. The registry may be a
// restricted view over the dataset's samples.
MiniBatch sample_batch(const SourceRegistry& registry, const Dataset& dataset,
                       const BatchSpec& spec, int source_id, Rng& rng);

// Mixed batch: classes drawn uniformly from the union of (source, class)
// pairs across all sources.
MiniBatch sample_naive_batch(const SourceRegistry& registry, const Dataset& dataset,
                             const BatchSpec& spec, Rng& rng);

const char* policy_kind_name(PolicyKind kind);
PolicyKind policy_kind_from_name(const std::string& name);

}  // namespace mdml
