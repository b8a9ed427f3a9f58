#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mdml {

// Deterministic random stream. mt19937_64 output is fixed by the standard and
// all distributions are hand-rolled on top of it, so a seed yields the same
// bit stream on every platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  // Standard normal via Box-Muller; caches the second deviate.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Fills out with i.i.d. standard normals.
  void fill_normal(std::vector<double>& out, double mean, double stddev);

  // Deterministic Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // First n elements of a deterministic partial shuffle of [0, pool).
  std::vector<std::size_t> sample_without_replacement(std::size_t pool, std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mdml
