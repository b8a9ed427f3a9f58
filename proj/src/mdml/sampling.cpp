#include "mdml/sampling.hpp"

#include <algorithm>

#include "mdml/errors.hpp"

namespace mdml {

void BatchSpec::validate() const {
  require(classes_per_batch >= 2, ErrorCode::InvalidArgument,
          "BatchSpec: classes_per_batch must be >= 2");
  require(samples_per_class >= 2, ErrorCode::InvalidArgument,
          "BatchSpec: samples_per_class must be >= 2");
}

void SamplingPolicy::validate() const {
  if (kind == PolicyKind::Boosted) {
    require(boost_factor > 0.0, ErrorCode::InvalidArgument,
            "SamplingPolicy: boost factor must be positive");
  }
}

std::vector<double> source_probabilities(const SourceRegistry& registry,
                                         const SamplingPolicy& policy) {
  require(registry.n_sources() > 0, ErrorCode::InvalidArgument,
          "source_probabilities: empty registry");
  require(policy.kind != PolicyKind::Naive, ErrorCode::InvalidArgument,
          "source_probabilities: naive policy does not choose a source");
  policy.validate();

  std::vector<double> weights(registry.n_sources(), 0.0);
  for (std::size_t i = 0; i < registry.n_sources(); ++i) {
    switch (policy.kind) {
      case PolicyKind::SourceBalanced:
        weights[i] = 1.0;
        break;
      case PolicyKind::Boosted: {
        const int id = registry.sources[i].source_id;
        const bool boosted = std::find(policy.boosted_sources.begin(),
                                       policy.boosted_sources.end(),
                                       id) != policy.boosted_sources.end();
        weights[i] = static_cast<double>(registry.splits[i].train.size()) *
                     (boosted ? policy.boost_factor : 1.0);
        break;
      }
      default:
        weights[i] = static_cast<double>(registry.splits[i].train.size());
        break;
    }
  }
  double total = 0.0;
  for (double w : weights) total += w;
  require(total > 0.0, ErrorCode::Sampling,
          "source_probabilities: no source has training samples");
  for (double& w : weights) w /= total;
  return weights;
}

int choose_source(const SourceRegistry& registry, const SamplingPolicy& policy, Rng& rng) {
  const std::vector<double> probs = source_probabilities(registry, policy);
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return registry.sources[i].source_id;
  }
  return registry.sources.back().source_id;
}

namespace {

struct ClassPool {
  int source_id = 0;
  std::vector<std::size_t> train_indices;
};

// Classes of one source with at least k train samples, in class-id order.
std::vector<ClassPool> class_pools_for_source(const SourceRegistry& registry,
                                              const Dataset& dataset, std::size_t src_index,
                                              int k) {
  const SourceSpec& spec = registry.sources[src_index];
  std::vector<ClassPool> pools(static_cast<std::size_t>(spec.n_classes));
  for (ClassPool& pool : pools) pool.source_id = spec.source_id;
  for (std::size_t idx : registry.splits[src_index].train) {
    const int c = dataset.samples[idx].class_id;
    if (c >= 0 && c < spec.n_classes) {
      pools[static_cast<std::size_t>(c)].train_indices.push_back(idx);
    }
  }
  std::vector<ClassPool> usable;
  for (ClassPool& pool : pools) {
    if (pool.train_indices.size() >= static_cast<std::size_t>(k)) {
      usable.push_back(std::move(pool));
    }
  }
  return usable;
}

// c distinct pools uniformly without replacement, then k samples per pool
// without replacement.
MiniBatch draw_from_pools(const std::vector<ClassPool>& pools, const BatchSpec& spec,
                          Rng& rng) {
  require(pools.size() >= static_cast<std::size_t>(spec.classes_per_batch),
          ErrorCode::Sampling,
          "sample_batch: fewer eligible classes than classes_per_batch");
  const std::vector<std::size_t> chosen = rng.sample_without_replacement(
      pools.size(), static_cast<std::size_t>(spec.classes_per_batch));
  MiniBatch batch;
  batch.indices.reserve(static_cast<std::size_t>(spec.batch_size()));
  for (std::size_t pool_idx : chosen) {
    const ClassPool& pool = pools[pool_idx];
    const std::vector<std::size_t> picks = rng.sample_without_replacement(
        pool.train_indices.size(), static_cast<std::size_t>(spec.samples_per_class));
    for (std::size_t p : picks) batch.indices.push_back(pool.train_indices[p]);
  }
  return batch;
}

}  // namespace

MiniBatch sample_batch(const SourceRegistry& registry, const Dataset& dataset,
                       const BatchSpec& spec, int source_id, Rng& rng) {
  spec.validate();
  const int src_index = registry.index_of(source_id);
  require(src_index >= 0, ErrorCode::Sampling,
          "sample_batch: unknown source " + std::to_string(source_id));
  const std::vector<ClassPool> pools = class_pools_for_source(
      registry, dataset, static_cast<std::size_t>(src_index), spec.samples_per_class);
  MiniBatch batch = draw_from_pools(pools, spec, rng);
  batch.source_id = source_id;
  return batch;
}

MiniBatch sample_naive_batch(const SourceRegistry& registry, const Dataset& dataset,
                             const BatchSpec& spec, Rng& rng) {
  spec.validate();
  require(registry.n_sources() > 0, ErrorCode::Sampling,
          "sample_naive_batch: empty registry");
  std::vector<ClassPool> pools;
  for (std::size_t si = 0; si < registry.n_sources(); ++si) {
    std::vector<ClassPool> source_pools =
        class_pools_for_source(registry, dataset, si, spec.samples_per_class);
    for (ClassPool& pool : source_pools) pools.push_back(std::move(pool));
  }
  MiniBatch batch = draw_from_pools(pools, spec, rng);
  bool single_source = true;
  for (std::size_t idx : batch.indices) {
    if (dataset.samples[idx].source_id != dataset.samples[batch.indices[0]].source_id) {
      single_source = false;
      break;
    }
  }
  if (single_source && !batch.indices.empty()) {
    batch.source_id = dataset.samples[batch.indices[0]].source_id;
  }
  return batch;
}

const char* policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Naive: return "naive";
    case PolicyKind::SourceSpecific: return "ss";
    case PolicyKind::SourceBalanced: return "bal";
    default: return "boosted";
  }
}

PolicyKind policy_kind_from_name(const std::string& name) {
  if (name == "naive") return PolicyKind::Naive;
  if (name == "ss") return PolicyKind::SourceSpecific;
  if (name == "bal") return PolicyKind::SourceBalanced;
  if (name == "boosted") return PolicyKind::Boosted;
  fail(ErrorCode::InvalidArgument, "unknown sampling policy: " + name);
}

}  // namespace mdml
