#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mdml/vecmat.hpp"

namespace mdml {

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

struct Sample {
  int source_id = 0;
  int class_id = 0;
  Vec features;

  bool operator==(const Sample&) const = default;
};

struct SourceSpec {
  int source_id = 0;
  int n_classes = 2;
  int samples_per_class = 10;
  double cluster_spread = 0.5;
  double inter_class_separation = 1.0;
  // Pulls odd class means toward their even partner, creating overlapping
  // class pairs; higher values make the source harder and quicker to overfit.
  double difficulty_drift = 0.0;

  void validate() const;
  bool operator==(const SourceSpec&) const = default;
};

struct SourceSplits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  const std::vector<std::size_t>& of(Split s) const {
    switch (s) {
      case Split::Train: return train;
      case Split::Val: return val;
      default: return test;
    }
  }
  bool operator==(const SourceSplits&) const = default;
};

struct SourceRegistry {
  std::vector<SourceSpec> sources;
  std::vector<SourceSplits> splits;  // aligned with sources

  std::size_t n_sources() const { return sources.size(); }
  int index_of(int source_id) const;  // -1 when absent
  bool operator==(const SourceRegistry&) const = default;
};

struct Dataset {
  int input_dim = 0;
  std::vector<Sample> samples;
  SourceRegistry registry;

  bool operator==(const Dataset&) const = default;
};

// Deterministic multi-source Gaussian-cluster generator. Sources live around
// well-separated centers; within a source, class means are drawn at the
// inter_class_separation scale and difficulty_drift collapses class pairs
// toward each other. Split assignment is not part of generation; see split().
Dataset generate_synthetic(const std::vector<SourceSpec>& specs, int input_dim,
                           std::uint64_t seed);

// Stratified per (source, class) split with the largest-remainder rule; every
// class must land at least one sample in each split.
void split(Dataset& dataset, const std::array<double, 3>& ratios, std::uint64_t seed);

void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

const char* split_name(Split s);
Split split_from_name(const std::string& name);

}  // namespace mdml
