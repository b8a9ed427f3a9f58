#pragma once

#include <functional>
#include <vector>

namespace mdml {

// Central-difference gradient estimate, one coordinate at a time. The default
// step of 1e-5 balances truncation against round-off at double precision.
std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& params, double h = 1e-5);

// ||a - b|| / max(||a||, ||b||, floor); the comparison metric used by every
// gradient check in the test suites.
double gradient_relative_error(const std::vector<double>& analytic,
                               const std::vector<double>& estimate);

}  // namespace mdml
