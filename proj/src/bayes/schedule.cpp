#include "molrel/bayes/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "molrel/core/error.hpp"

namespace molrel::bayes {

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kNone: return "none";
    case Mode::kEnsemble: return "ensemble";
    case Mode::kMcDropout: return "mcdo";
    case Mode::kBbb: return "bbb";
    case Mode::kSgld: return "sgld";
    case Mode::kSwa: return "swa";
    case Mode::kSwag: return "swag";
  }
  return "?";
}

Mode mode_from_name(std::string_view name) {
  for (auto m : {Mode::kNone, Mode::kEnsemble, Mode::kMcDropout, Mode::kBbb, Mode::kSgld, Mode::kSwa, Mode::kSwag}) {
    if (mode_name(m) == name) return m;
  }
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected none, ensemble, mcdo, bbb, sgld, swa or swag)");
}

void Schedule::validate(Mode mode) const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("schedule: " + what);
  };
  require(batch_size >= 1, "batch_size must be >= 1");
  require(weight_decay >= 0, "weight_decay must be >= 0");
  require(grad_clip_norm >= 0, "grad_clip_norm must be >= 0");
  switch (mode) {
    case Mode::kSwa:
    case Mode::kSwag:
      require(swa_epochs >= 1, "swa_epochs must be >= 1");
      require(swa_lr_initial >= 0 && swa_lr_high >= 0 && swa_lr_low >= 0, "learning rates must be >= 0");
      require(swa_decay_start <= swa_precondition && swa_precondition < swa_epochs,
              "need swa_decay_start <= swa_precondition < swa_epochs");
      require(swa_cycle_epochs >= 1, "swa_cycle_epochs must be >= 1");
      require(swag_rank >= 1 && swag_scale >= 0, "swag_rank must be >= 1 and swag_scale >= 0");
      require(swag_samples >= 1, "swag_samples must be >= 1");
      return;
    case Mode::kEnsemble: require(ensemble_size >= 2, "ensemble_size must be >= 2"); break;
    case Mode::kMcDropout:
      require(dropout >= 0 && dropout < 1, "dropout must be in [0, 1)");
      require(mc_samples >= 1, "mc_samples must be >= 1");
      break;
    case Mode::kBbb:
      require(kl_scale >= 0 && prior_sigma > 0 && bbb_sigma_init > 0,
              "kl_scale must be >= 0, prior_sigma and bbb_sigma_init > 0");
      require(bbb_train_samples >= 1 && bbb_eval_samples >= 1, "bbb sample counts must be >= 1");
      break;
    case Mode::kSgld:
      require(sgld_burn_in < epochs, "sgld_burn_in must be < epochs");
      require(sgld_cadence >= 1, "sgld_cadence must be >= 1");
      require(sgld_alpha >= 0 && sgld_alpha < 1 && sgld_lambda >= 0, "sgld_alpha must be in [0, 1), sgld_lambda >= 0");
      break;
    case Mode::kNone: break;
  }
  require(epochs >= 1, "epochs must be >= 1");
  require(learning_rate >= 0, "learning_rate must be >= 0");
  require(decay_factor >= 0, "decay_factor must be >= 0");
}

double Schedule::step_lr(std::size_t epoch) const {
  double lr = learning_rate;
  for (std::size_t d : decay_epochs)
    if (epoch > d) lr *= decay_factor;
  return lr;
}

double Schedule::swa_lr(std::size_t epoch, std::size_t iter, std::size_t iters_per_epoch) const {
  if (epoch <= swa_decay_start) return swa_lr_initial;
  if (epoch <= swa_precondition) {
    const double t = static_cast<double>(epoch - swa_decay_start) / static_cast<double>(swa_precondition - swa_decay_start);
    return swa_lr_initial + (swa_lr_high - swa_lr_initial) * t;
  }
  const std::size_t cycle_iters = swa_cycle_epochs * iters_per_epoch;
  const std::size_t pos = ((epoch - swa_precondition - 1) % swa_cycle_epochs) * iters_per_epoch + iter;
  if (cycle_iters <= 1) return swa_lr_low;
  const double t = static_cast<double>(pos) / static_cast<double>(cycle_iters - 1);
  return swa_lr_high + (swa_lr_low - swa_lr_high) * t;
}

bool Schedule::swa_snapshot_epoch(std::size_t epoch) const {
  return epoch > swa_precondition && (epoch - swa_precondition) % swa_cycle_epochs == 0;
}

bool Schedule::sgld_sample_epoch(std::size_t epoch) const {
  return epoch > sgld_burn_in && (epoch - sgld_burn_in) % sgld_cadence == 0;
}

#define MOLREL_SCHEDULE_FIELDS(X)                                                                              \
  X(batch_size) X(weight_decay) X(grad_clip_norm) X(epochs) X(learning_rate) X(decay_epochs) X(decay_factor) X(ensemble_size)  \
  X(dropout) X(mc_samples) X(kl_scale) X(prior_sigma) X(bbb_sigma_init) X(bbb_train_samples) X(bbb_eval_samples)   \
  X(sgld_burn_in) X(sgld_cadence) X(sgld_alpha) X(sgld_lambda) X(swa_epochs) X(swa_lr_initial)               \
  X(swa_decay_start) X(swa_precondition) X(swa_lr_high) X(swa_lr_low) X(swa_cycle_epochs) X(swag_rank)       \
  X(swag_scale) X(swag_samples)

void to_json(nlohmann::json& j, const Schedule& s) {
  j = nlohmann::json::object();
#define X(f) j[#f] = s.f;
  MOLREL_SCHEDULE_FIELDS(X)
#undef X
}

void from_json(const nlohmann::json& j, Schedule& s) {
  s = Schedule{};
  if (!j.is_object()) throw ConfigError("schedule must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    try {
#define X(f)                      \
  if (key == #f) {                \
    value.get_to(s.f);            \
    known = true;                 \
  }
      MOLREL_SCHEDULE_FIELDS(X)
#undef X
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("schedule." + key + ": " + e.what());
    }
    if (!known) throw ConfigError("unknown schedule key '" + key + "'");
  }
}

}  // namespace molrel::bayes
