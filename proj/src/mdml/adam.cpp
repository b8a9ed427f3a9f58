#include "mdml/adam.hpp"

#include <cmath>

#include "mdml/errors.hpp"

namespace mdml {

AdamState::AdamState(std::size_t n_params, double learning_rate)
    : lr(learning_rate), m(n_params, 0.0), v(n_params, 0.0) {
  require(learning_rate > 0.0, ErrorCode::InvalidArgument, "AdamState: lr must be positive");
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state) {
  const std::size_t n = params.size();
  require(grads.size() == n && state.m.size() == n && state.v.size() == n,
          ErrorCode::Dimension, "adam_step: shape mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace mdml
