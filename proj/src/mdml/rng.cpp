#include "mdml/rng.hpp"

#include <cmath>
#include <numbers>

#include "mdml/errors.hpp"

namespace mdml {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  require(n > 0, ErrorCode::InvalidArgument, "uniform_index: n must be positive");
  // Rejection sampling over the largest multiple of n keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void Rng::fill_normal(std::vector<double>& out, double mean, double stddev) {
  for (double& v : out) v = mean + stddev * normal();
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t pool, std::size_t n) {
  require(n <= pool, ErrorCode::Sampling,
          "sample_without_replacement: requested more items than the pool holds");
  std::vector<std::size_t> indices(pool);
  for (std::size_t i = 0; i < pool; ++i) indices[i] = i;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(pool - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(n);
  return indices;
}

}  // namespace mdml
