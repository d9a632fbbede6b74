#include "molrel/autodiff/optimizer.hpp"

#include <cmath>
#include <string>

#include "molrel/core/error.hpp"

namespace molrel::ad {

Optimizer::Optimizer(OptimizerConfig config, std::size_t n_params) : config_(config) {
  if (!(config_.learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (config_.weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
  if (config_.kind == OptimizerKind::kAdam) {
    first_moment_.assign(n_params, 0.0);
    second_moment_.assign(n_params, 0.0);
  }
}

void Optimizer::set_learning_rate(double lr) {
  if (!(lr >= 0.0)) throw ConfigError("learning rate must be non-negative");
  config_.learning_rate = lr;
}

void Optimizer::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size()) {
    throw ShapeError("optimizer: " + std::to_string(grads.size()) + " gradients for " + std::to_string(params.size()) +
                     " parameters");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) throw NumericError("optimizer: non-finite gradient at coordinate " + std::to_string(i));
  }
  ++steps_;
  const double lr = config_.learning_rate;
  const double wd = config_.weight_decay;
  if (config_.kind == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * (grads[i] + wd * params[i]);
    return;
  }
  if (first_moment_.size() != params.size()) throw ShapeError("optimizer: parameter count changed between steps");
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + wd * params[i];
    first_moment_[i] = b1 * first_moment_[i] + (1.0 - b1) * g;
    second_moment_[i] = b2 * second_moment_[i] + (1.0 - b2) * g * g;
    const double m_hat = first_moment_[i] / c1;
    const double v_hat = second_moment_[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

}  // namespace molrel::ad
