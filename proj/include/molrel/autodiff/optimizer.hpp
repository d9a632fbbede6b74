#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace molrel::ad {

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  /// Added to the gradient as g + λw before the update, for both kinds.
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First-order optimizer over a flat parameter vector.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, std::size_t n_params);

  /// Updates `params` in place. A non-finite gradient rejects the whole step
  /// (params untouched) with a NumericError naming the coordinate.
  void step(std::span<double> params, std::span<const double> grads);

  void set_learning_rate(double lr);
  double learning_rate() const noexcept { return config_.learning_rate; }
  std::uint64_t step_count() const noexcept { return steps_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  OptimizerConfig config_;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
  std::uint64_t steps_ = 0;
};

}  // namespace molrel::ad
