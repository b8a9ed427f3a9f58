#include "mdml/losses.hpp"

#include <cmath>

#include "mdml/errors.hpp"

namespace mdml {

BatchDistances make_batch_distances(const std::vector<Vec>& embeddings) {
  BatchDistances bd;
  bd.dist = pairwise_distances(embeddings);
  const std::size_t n = bd.dist.rows;
  if (n > 1) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) sum += bd.dist.at(i, j);
      }
    }
    bd.mu = sum / static_cast<double>(n * n - n);
  }
  return bd;
}

double huber(double x, double y) {
  require(std::isfinite(x) && std::isfinite(y), ErrorCode::InvalidArgument,
          "huber: non-finite input");
  const double r = std::abs(x - y);
  return r <= 1.0 ? 0.5 * r * r : r - 0.5;
}

double huber_grad_y(double x, double y) {
  const double r = y - x;
  if (std::abs(r) <= 1.0) return r;
  return r > 0.0 ? 1.0 : -1.0;
}

LossValue rkd_loss(const BatchDistances& teacher, const std::vector<Vec>& student,
                   bool normalized) {
  const std::size_t n = student.size();
  require(teacher.dist.rows == n && teacher.dist.cols == n, ErrorCode::Dimension,
          "rkd_loss: teacher matrix size does not match student batch");
  require(n >= 2, ErrorCode::InvalidArgument, "rkd_loss: need at least two embeddings");

  const BatchDistances sd = make_batch_distances(student);
  double mu_t = 1.0;
  double mu_s = 1.0;
  if (normalized) {
    require(teacher.mu > 0.0, ErrorCode::DegenerateInput,
            "rkd_loss: teacher mean distance must be positive in normalized mode");
    require(sd.mu > 0.0, ErrorCode::DegenerateInput,
            "rkd_loss: student mean distance must be positive in normalized mode");
    mu_t = teacher.mu;
    mu_s = sd.mu;
  }

  const double n_pairs = static_cast<double>(n * (n - 1) / 2);
  LossValue out;
  out.grad_embeddings.assign(n, Vec(student[0].size(), 0.0));

  // dL/d d_s(i,j) accumulated per pair; in normalized mode the batch mean
  // mu_s depends on every pair, so its term is collected separately.
  Mat pair_grad(n, n);
  double mu_term = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dt = teacher.dist.at(i, j) / mu_t;
      const double ds = sd.dist.at(i, j) / mu_s;
      out.value += huber(dt, ds);
      const double g = huber_grad_y(dt, ds) / n_pairs;
      pair_grad.at(i, j) = g / mu_s;
      if (normalized) mu_term += g * sd.dist.at(i, j);
    }
  }
  out.value /= n_pairs;

  if (normalized) {
    // d mu_s / d d_s(i,j) = 1 / n_pairs for every unordered pair.
    const double correction = mu_term / (mu_s * mu_s * n_pairs);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) pair_grad.at(i, j) -= correction;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = sd.dist.at(i, j);
      if (d <= 0.0) continue;  // coincident embeddings: subgradient 0
      const double g = pair_grad.at(i, j) / d;
      for (std::size_t k = 0; k < student[0].size(); ++k) {
        const double diff = student[i][k] - student[j][k];
        out.grad_embeddings[i][k] += g * diff;
        out.grad_embeddings[j][k] -= g * diff;
      }
    }
  }
  return out;
}

LossValue triplet_loss(const Vec& anchor, const Vec& positive, const Vec& negative,
                       double margin) {
  require(anchor.size() == positive.size() && anchor.size() == negative.size(),
          ErrorCode::Dimension, "triplet_loss: dimension mismatch");
  require(margin >= 0.0, ErrorCode::InvalidArgument, "triplet_loss: margin must be >= 0");
  const double dap = l2_distance(anchor, positive);
  const double dan = l2_distance(anchor, negative);
  const double hinge = dap - dan + margin;

  LossValue out;
  out.grad_embeddings.assign(3, Vec(anchor.size(), 0.0));
  if (hinge <= 0.0) return out;  // subgradient 0 at the kink
  out.value = hinge;
  for (std::size_t k = 0; k < anchor.size(); ++k) {
    const double gp = dap > 0.0 ? (anchor[k] - positive[k]) / dap : 0.0;
    const double gn = dan > 0.0 ? (anchor[k] - negative[k]) / dan : 0.0;
    out.grad_embeddings[0][k] = gp - gn;
    out.grad_embeddings[1][k] = -gp;
    out.grad_embeddings[2][k] = gn;
  }
  return out;
}

LossValue contrastive_loss(const Vec& a, const Vec& b, bool same_class, double margin) {
  require(a.size() == b.size(), ErrorCode::Dimension, "contrastive_loss: dimension mismatch");
  require(margin >= 0.0, ErrorCode::InvalidArgument, "contrastive_loss: margin must be >= 0");
  const double d = l2_distance(a, b);
  LossValue out;
  out.grad_embeddings.assign(2, Vec(a.size(), 0.0));
  if (same_class) {
    out.value = d * d;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double g = 2.0 * (a[k] - b[k]);
      out.grad_embeddings[0][k] = g;
      out.grad_embeddings[1][k] = -g;
    }
  } else {
    const double slack = margin - d;
    if (slack <= 0.0) return out;
    out.value = slack * slack;
    if (d > 0.0) {
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double g = -2.0 * slack * (a[k] - b[k]) / d;
        out.grad_embeddings[0][k] = g;
        out.grad_embeddings[1][k] = -g;
      }
    }
  }
  return out;
}

LossValue multi_similarity_loss(const std::vector<Vec>& embeddings,
                                const std::vector<int>& labels,
                                const MultiSimilarityParams& params) {
  const std::size_t n = embeddings.size();
  require(n >= 2, ErrorCode::InvalidArgument, "multi_similarity_loss: need at least 2 samples");
  require(labels.size() == n, ErrorCode::Dimension,
          "multi_similarity_loss: labels size mismatch");
  const std::size_t dim = embeddings[0].size();
  for (const Vec& e : embeddings) {
    require(e.size() == dim, ErrorCode::Dimension, "multi_similarity_loss: ragged embeddings");
  }

  Mat sim(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = dot(embeddings[i], embeddings[j]);
      sim.at(i, j) = s;
      sim.at(j, i) = s;
    }
  }

  LossValue out;
  out.grad_embeddings.assign(n, Vec(dim, 0.0));
  Mat sim_grad(n, n);  // dL/dS(i,j), anchor-major accumulation
  double total = 0.0;
  int counted = 0;

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      (labels[j] == labels[i] ? pos : neg).push_back(j);
    }
    if (pos.empty() || neg.empty()) continue;

    double hardest_pos = sim.at(i, pos[0]);
    for (std::size_t j : pos) hardest_pos = std::min(hardest_pos, sim.at(i, j));
    double hardest_neg = sim.at(i, neg[0]);
    for (std::size_t j : neg) hardest_neg = std::max(hardest_neg, sim.at(i, j));

    std::vector<std::size_t> mined_pos, mined_neg;
    for (std::size_t j : pos) {
      if (sim.at(i, j) < hardest_neg + params.mining_margin) mined_pos.push_back(j);
    }
    for (std::size_t j : neg) {
      if (sim.at(i, j) > hardest_pos - params.mining_margin) mined_neg.push_back(j);
    }
    if (mined_pos.empty() && mined_neg.empty()) continue;
    ++counted;

    double pos_sum = 0.0;
    for (std::size_t j : mined_pos) {
      pos_sum += std::exp(-params.alpha * (sim.at(i, j) - params.lambda));
    }
    double neg_sum = 0.0;
    for (std::size_t j : mined_neg) {
      neg_sum += std::exp(params.beta * (sim.at(i, j) - params.lambda));
    }
    total += std::log1p(pos_sum) / params.alpha + std::log1p(neg_sum) / params.beta;

    for (std::size_t j : mined_pos) {
      const double e = std::exp(-params.alpha * (sim.at(i, j) - params.lambda));
      sim_grad.at(i, j) += -e / (1.0 + pos_sum);
    }
    for (std::size_t j : mined_neg) {
      const double e = std::exp(params.beta * (sim.at(i, j) - params.lambda));
      sim_grad.at(i, j) += e / (1.0 + neg_sum);
    }
  }

  if (counted == 0) return out;
  out.value = total / counted;
  require(std::isfinite(out.value), ErrorCode::Diverged,
          "multi_similarity_loss: non-finite loss value");

  const double scale = 1.0 / counted;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double g = sim_grad.at(i, j) * scale;
      if (g == 0.0) continue;
      for (std::size_t k = 0; k < dim; ++k) {
        out.grad_embeddings[i][k] += g * embeddings[j][k];
        out.grad_embeddings[j][k] += g * embeddings[i][k];
      }
    }
  }
  return out;
}

}  // namespace mdml
