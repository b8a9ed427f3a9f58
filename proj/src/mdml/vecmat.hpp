#pragma once

#include <cstddef>
#include <vector>

namespace mdml {

using Vec = std::vector<double>;

// Dense row-major matrix.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

double dot(const Vec& a, const Vec& b);
double norm(const Vec& v);

// Euclidean distance between equal-length vectors.
double l2_distance(const Vec& a, const Vec& b);

// Symmetric n x n distance matrix with zero diagonal.
Mat pairwise_distances(const std::vector<Vec>& batch);

// v / ||v||. The zero vector is rejected rather than patched with an epsilon.
Vec l2_normalize(const Vec& v);

// y = M x
Vec mat_vec(const Mat& m, const Vec& x);

}  // namespace mdml
