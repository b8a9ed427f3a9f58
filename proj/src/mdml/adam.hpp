#pragma once

#include <cstdint>
#include <vector>

namespace mdml {

// Adam optimizer state over a flat parameter vector.
struct AdamState {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<double> m;  // first-moment accumulator
  std::vector<double> v;  // second-moment accumulator

  AdamState() = default;
  AdamState(std::size_t n_params, double learning_rate);
};

// One bias-corrected Adam update. params, grads and the accumulators must all
// have the same length.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state);

}  // namespace mdml
