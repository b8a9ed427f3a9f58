#include "mdml/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mdml/errors.hpp"

namespace mdml {

namespace {

double off_diagonal_norm(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = i + 1; j < a.cols; ++j) s += a.at(i, j) * a.at(i, j);
  }
  return std::sqrt(2.0 * s);
}

}  // namespace

EigenResult symmetric_eigen(const Mat& m) {
  require(m.rows == m.cols && m.rows > 0, ErrorCode::Dimension,
          "symmetric_eigen: matrix must be square and nonempty");
  const std::size_t n = m.rows;
  Mat a = m;
  Mat v(n, n);
  for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

  double frob = 0.0;
  for (double x : a.values) frob += x * x;
  frob = std::sqrt(frob);
  const double tol = std::max(frob, 1.0) * 1e-14;

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= tol) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::abs(apq) <= tol / static_cast<double>(n)) continue;
        const double app = a.at(p, p);
        const double aqq = a.at(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a.at(k, p);
          const double akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a.at(p, k);
          const double aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v.at(k, p);
          const double vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a.at(i, i) > a.at(j, j);
  });

  EigenResult result;
  result.eigenvalues.resize(n);
  result.eigenvectors = Mat(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    result.eigenvalues[j] = a.at(src, src);
    // Fix the sign so the largest-magnitude entry is positive; keeps the
    // decomposition deterministic.
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::abs(v.at(i, src));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    const double sign = v.at(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) result.eigenvectors.at(i, j) = sign * v.at(i, src);
  }
  return result;
}

PcaModel pca_fit(const std::vector<Vec>& data, std::size_t out_dim) {
  require(!data.empty(), ErrorCode::InvalidArgument, "pca_fit: empty data");
  const std::size_t n = data.size();
  const std::size_t d = data[0].size();
  for (const Vec& row : data) {
    require(row.size() == d, ErrorCode::Dimension, "pca_fit: ragged input");
  }
  require(out_dim >= 1 && out_dim <= d, ErrorCode::Dimension,
          "pca_fit: out_dim must be in [1, input_dim]");
  require(n > out_dim, ErrorCode::Dimension,
          "pca_fit: need more samples than output dimensions");

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (const Vec& row : data) {
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += row[j];
  }
  for (std::size_t j = 0; j < d; ++j) model.mean[j] /= static_cast<double>(n);

  Mat cov(d, d);
  std::vector<double> centered(d);
  for (const Vec& row : data) {
    for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - model.mean[j];
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) cov.at(i, j) += centered[i] * centered[j];
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov.at(i, j) /= denom;
      cov.at(j, i) = cov.at(i, j);
    }
  }

  const EigenResult eig = symmetric_eigen(cov);
  model.basis = Mat(out_dim, d);
  model.explained_variance.resize(out_dim);
  for (std::size_t r = 0; r < out_dim; ++r) {
    model.explained_variance[r] = eig.eigenvalues[r];
    for (std::size_t j = 0; j < d; ++j) model.basis.at(r, j) = eig.eigenvectors.at(j, r);
  }
  return model;
}

Vec pca_project(const PcaModel& model, const Vec& v) {
  require(v.size() == model.mean.size(), ErrorCode::Dimension,
          "pca_project: input dimension mismatch");
  Vec centered(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) centered[j] = v[j] - model.mean[j];
  return mat_vec(model.basis, centered);
}

}  // namespace mdml
