#include "mdml/vecmat.hpp"

#include <cmath>

#include "mdml/errors.hpp"

namespace mdml {

bool all_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool all_finite(const Mat& m) { return all_finite(m.values); }

double dot(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), ErrorCode::Dimension, "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

double l2_distance(const Vec& a, const Vec& b) {
  require(a.size() == b.size(), ErrorCode::Dimension, "l2_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Mat pairwise_distances(const std::vector<Vec>& batch) {
  require(!batch.empty(), ErrorCode::InvalidArgument, "pairwise_distances: empty batch");
  const std::size_t n = batch.size();
  Mat out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = l2_distance(batch[i], batch[j]);
      out.at(i, j) = d;
      out.at(j, i) = d;
    }
  }
  return out;
}

Vec l2_normalize(const Vec& v) {
  const double n = norm(v);
  require(n > 0.0, ErrorCode::DegenerateInput, "l2_normalize: zero vector");
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

Vec mat_vec(const Mat& m, const Vec& x) {
  require(m.cols == x.size(), ErrorCode::Dimension, "mat_vec: dimension mismatch");
  Vec y(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double s = 0.0;
    const double* row = &m.values[r * m.cols];
    for (std::size_t c = 0; c < m.cols; ++c) s += row[c] * x[c];
    y[r] = s;
  }
  return y;
}

}  // namespace mdml
