#pragma once

#include <functional>
#include <span>
#include <vector>

namespace molrel::ad {

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central-difference gradient (f(w + h e_i) - f(w - h e_i)) / 2h. The function
/// must be deterministic; a base point evaluating differently twice is rejected.
std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> params, double h = 1e-5);

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor); the floor keeps near-zero
/// coordinates from dominating.
double max_relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-6);

}  // namespace molrel::ad
