#include "mdml/finite_diff.hpp"

#include <algorithm>
#include <cmath>

#include "mdml/errors.hpp"

namespace mdml {

std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& params, double h) {
  require(h > 0.0, ErrorCode::InvalidArgument, "finite_diff_grad: h must be positive");
  std::vector<double> grad(params.size(), 0.0);
  std::vector<double> p = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + h;
    const double fp = f(p);
    p[i] = saved - h;
    const double fm = f(p);
    p[i] = saved;
    require(std::isfinite(fp) && std::isfinite(fm), ErrorCode::DegenerateInput,
            "finite_diff_grad: function not finite at perturbed point");
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

double gradient_relative_error(const std::vector<double>& analytic,
                               const std::vector<double>& estimate) {
  require(analytic.size() == estimate.size(), ErrorCode::Dimension,
          "gradient_relative_error: length mismatch");
  double diff = 0.0, na = 0.0, ne = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double d = analytic[i] - estimate[i];
    diff += d * d;
    na += analytic[i] * analytic[i];
    ne += estimate[i] * estimate[i];
  }
  const double denom = std::max({std::sqrt(na), std::sqrt(ne), 1e-12});
  return std::sqrt(diff) / denom;
}

}  // namespace mdml
