#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdml/rng.hpp"
#include "mdml/vecmat.hpp"

namespace mdml {

enum class Activation { Relu, Tanh };

struct EncoderConfig {
  int input_dim = 32;
  std::vector<int> hidden_dims = {96, 96};
  int embed_dim = 128;
  Activation activation = Activation::Relu;

  // [input_dim, hidden..., embed_dim]
  std::vector<int> layer_dims() const;
  int n_layers() const { return static_cast<int>(hidden_dims.size()) + 1; }
  std::size_t n_params() const;
  void validate() const;

  bool operator==(const EncoderConfig&) const = default;
};

// Parameters live in one flat vector laid out as [W0, b0, W1, b1, ...] with
// row-major weights, so the optimizer and gradient checks operate on the
// whole set at once.
struct EncoderParams {
  EncoderConfig config;
  std::vector<double> values;

  std::span<double> weight(int layer);
  std::span<const double> weight(int layer) const;
  std::span<double> bias(int layer);
  std::span<const double> bias(int layer) const;
};

// He-normal weights (std = sqrt(2 / fan_in)), zero biases, deterministic in seed.
EncoderParams init_params(const EncoderConfig& config, std::uint64_t seed);

// Unit-norm embedding of x. Throws DegenerateInput if the pre-normalization
// output is the zero vector.
Vec forward(const EncoderParams& params, const Vec& x);

// Pre-normalization output of the final linear layer.
Vec forward_raw(const EncoderParams& params, const Vec& x);

std::vector<Vec> forward_batch(const EncoderParams& params, const std::vector<Vec>& xs);

// Gradients of sum_i <upstream[i], forward(params, xs[i])> with respect to the
// flat parameter vector. The normalization Jacobian (I - e e^T) / ||z|| is
// part of the chain.
std::vector<double> backward(const EncoderParams& params, const std::vector<Vec>& xs,
                             const std::vector<Vec>& upstream);

// Checkpoint document: config, flat parameters in layer order, training step,
// seed. Binary, versioned, bitwise round-trip.
struct Checkpoint {
  EncoderParams params;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

}  // namespace mdml
