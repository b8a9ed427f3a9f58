#pragma once

#include <vector>

#include "mdml/vecmat.hpp"

namespace mdml {

// Pairwise distance matrix of a mini-batch plus the mean of the strictly
// off-diagonal entries.
struct BatchDistances {
  Mat dist;
  double mu = 0.0;
};

BatchDistances make_batch_distances(const std::vector<Vec>& embeddings);

struct LossValue {
  double value = 0.0;
  std::vector<Vec> grad_embeddings;
};

// Quadratic within |x - y| <= 1, linear outside; continuous at the joint.
double huber(double x, double y);
// d huber / d y.
double huber_grad_y(double x, double y);

// Distance-matching distillation loss: mean over unordered pairs of
// huber(d_t, d_s). With normalized=true both distance sets are divided by
// their batch mean first. Gradients flow to the student embeddings only.
LossValue rkd_loss(const BatchDistances& teacher, const std::vector<Vec>& student,
                   bool normalized);

// max(0, d(a,p) - d(a,n) + margin); grads returned for (a, p, n).
LossValue triplet_loss(const Vec& anchor, const Vec& positive, const Vec& negative,
                       double margin);

// Same class: d^2. Different class: max(0, margin - d)^2. Grads for (a, b).
LossValue contrastive_loss(const Vec& a, const Vec& b, bool same_class, double margin);

struct MultiSimilarityParams {
  double alpha = 2.0;
  double beta = 50.0;
  double lambda = 1.0;
  double mining_margin = 0.1;
};

// Log-sum-exp loss over mined positive/negative dot-product similarities,
// averaged over anchors that mined at least one pair. Anchors that have no
// positive or no negative candidate in the batch are skipped.
LossValue multi_similarity_loss(const std::vector<Vec>& embeddings,
                                const std::vector<int>& labels,
                                const MultiSimilarityParams& params);

}  // namespace mdml
