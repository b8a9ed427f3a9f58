#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mdml/dataset.hpp"
#include "mdml/training.hpp"

namespace mdml {

// Dataset-generation request parsed from a schema-versioned JSON document.
struct GenConfig {
  int input_dim = 32;
  std::uint64_t seed = 7;
  std::vector<SourceSpec> sources;
  std::array<double, 3> split_ratios = {2.0, 1.0, 1.0};
};

GenConfig parse_gen_config(const std::string& json_text);
TrainConfig parse_train_config(const std::string& json_text);

// Summary of a dataset (sources, sizes, split counts) as a JSON document.
std::string dataset_summary_json(const Dataset& dataset);

}  // namespace mdml
