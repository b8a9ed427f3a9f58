#pragma once

#include <vector>

#include "mdml/vecmat.hpp"

namespace mdml {

struct PcaModel {
  Mat basis;               // out_dim x input_dim, orthonormal rows
  Vec mean;                // input_dim
  Vec explained_variance;  // out_dim, decreasing
};

// Principal components via eigendecomposition of the sample covariance.
// Requires data.size() > out_dim and 1 <= out_dim <= input_dim.
PcaModel pca_fit(const std::vector<Vec>& data, std::size_t out_dim);

// basis * (v - mean)
Vec pca_project(const PcaModel& model, const Vec& v);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues in descending order with matching eigenvector columns.
struct EigenResult {
  Vec eigenvalues;
  Mat eigenvectors;  // column j is the eigenvector for eigenvalues[j]
};
EigenResult symmetric_eigen(const Mat& m);

}  // namespace mdml
