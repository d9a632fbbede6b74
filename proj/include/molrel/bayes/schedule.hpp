#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace molrel::bayes {

enum class Mode { kNone, kEnsemble, kMcDropout, kBbb, kSgld, kSwa, kSwag };

std::string_view mode_name(Mode mode);
/// Accepts none, ensemble, mcdo, bbb, sgld, swa, swag; throws ConfigError otherwise.
Mode mode_from_name(std::string_view name);

/// Hyperparameters of every mode. Epochs are 1-based throughout.
struct Schedule {
  std::size_t batch_size = 128;
  double weight_decay = 1e-4;
  double grad_clip_norm = 0.0;  // rescale mini-batch gradients to at most this L2 norm; 0 disables (not applied to sgld)

  // Adam phase shared by none, ensemble, mcdo and bbb; also the step size of sgld.
  std::size_t epochs = 200;
  double learning_rate = 1e-3;
  std::vector<std::size_t> decay_epochs{80, 160};  // lr *= decay_factor after each listed epoch
  double decay_factor = 0.1;

  std::size_t ensemble_size = 10;

  double dropout = 0.2;
  std::size_t mc_samples = 30;

  double kl_scale = 0.01;
  double prior_sigma = 10.0;
  double bbb_sigma_init = 0.05;  // initial softplus(ρ) of every factor
  std::size_t bbb_train_samples = 5;
  std::size_t bbb_eval_samples = 100;

  std::size_t sgld_burn_in = 100;
  std::size_t sgld_cadence = 2;
  double sgld_alpha = 0.99;
  double sgld_lambda = 1e-8;

  // SGD phase of swa/swag.
  std::size_t swa_epochs = 250;
  double swa_lr_initial = 0.1;
  std::size_t swa_decay_start = 75;   // lr falls linearly to swa_lr_high over (decay_start, precondition]
  std::size_t swa_precondition = 150;
  double swa_lr_high = 0.01;          // cyclic lr at the first iteration of a cycle
  double swa_lr_low = 0.001;          // cyclic lr at the last iteration of a cycle
  std::size_t swa_cycle_epochs = 4;
  std::size_t swag_rank = 20;
  double swag_scale = 1.0;
  std::size_t swag_samples = 30;

  /// Throws ConfigError on values inconsistent for `mode` (burn-in >= epochs, zero cadence, ...).
  void validate(Mode mode) const;

  /// Adam/sgld step size during 1-based `epoch`.
  double step_lr(std::size_t epoch) const;
  /// SGD step size at iteration `iter` (0-based) of `iters_per_epoch` within 1-based `epoch`.
  double swa_lr(std::size_t epoch, std::size_t iter, std::size_t iters_per_epoch) const;
  /// Whether `epoch` ends a cyclic-lr cycle (and so yields a snapshot).
  bool swa_snapshot_epoch(std::size_t epoch) const;
  bool sgld_sample_epoch(std::size_t epoch) const;
};

void to_json(nlohmann::json& j, const Schedule& s);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
void from_json(const nlohmann::json& j, Schedule& s);

}  // namespace molrel::bayes
