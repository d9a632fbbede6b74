#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "molrel/bayes/objective.hpp"
#include "molrel/bayes/posterior.hpp"
#include "molrel/bayes/schedule.hpp"

namespace molrel::bayes {

/// Scores the current parameters on held-out data (e.g. valid AUROC); NaN when undefined.
/// May throw NumericError for non-finite predictions; the trainer reports it as divergence at that epoch.
using Validator = std::function<double(std::span<const double> w)>;

struct EpochRecord {
  std::size_t epoch = 0;
  double learning_rate = 0.0;  // at the first iteration of the epoch
  double train_loss = 0.0;     // example-weighted mean of the batch objectives
  std::optional<double> valid_metric;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const TrainLog& log);

struct TrainResult {
  Posterior posterior;
  std::vector<TrainLog> logs;  // one per member; ensembles keep excluded members' logs too
};

/// Streams are derived from (seed, purpose, member).
struct RunSeed {
  std::uint64_t seed = 0;
  std::uint64_t member = 0;
};

/// Adam with the step decay schedule; residual dropout at schedule.dropout when
/// `with_dropout`. A non-finite loss or gradient throws NumericError naming the epoch.
TrainResult train_map(const Objective& objective, const Schedule& schedule, RunSeed run, const Validator& validate = {},
                      bool with_dropout = false);

/// One MAP run per entry of `member_seeds`. Diverging members are excluded and
/// reported as warnings; fewer than two members or survivors throws.
TrainResult train_ensemble(const Objective& objective, const Schedule& schedule, std::span<const RunSeed> members,
                           const Validator& validate = {});

/// MAP with residual dropout; the posterior keeps the rate for prediction.
TrainResult train_mc_dropout(const Objective& objective, const Schedule& schedule, RunSeed run,
                             const Validator& validate = {});

struct BbbGradient {
  std::vector<double> mu;
  std::vector<double> rho;
};

/// Mean over the rows of `noise` (each one z per parameter) of NLL(μ + σ⊙z)
/// plus kl_scale·KL/N, with gradients w.r.t. μ and ρ.
double bbb_objective(const Objective& objective, const BbbFactors& factors, std::span<const std::size_t> examples,
                     std::span<const std::vector<double>> noise, double kl_scale, double prior_sigma,
                     BbbGradient& grad);

/// Adam on (μ, ρ) without weight decay; σ below 1e-8 is clamped and counted in the log.
TrainResult train_bbb(const Objective& objective, const Schedule& schedule, RunSeed run, const Validator& validate = {});

struct PsgldState {
  std::vector<double> v;  // RMS statistic; empty until the first step
  double alpha = 0.99;
  double lambda = 1e-8;
  bool preconditioned = true;  // false: G = 1 and v is not tracked
};

/// Rescales `grad` in place to L2 norm `max_norm` when it is larger; max_norm <= 0 leaves it unchanged.
void clip_gradient(std::vector<double>& grad, double max_norm);

/// w += (ε/2)·G⊙∇log p + √(ε·G)⊙z with V ← αV + (1−α)(∇log p)², G = 1/(√V + λ).
/// Throws NumericError when any updated coordinate is non-finite.
void psgld_step(std::span<double> w, std::span<const double> grad_log_posterior, double step_size, PsgldState& state,
                std::span<const double> z);
void psgld_step(std::span<double> w, std::span<const double> grad_log_posterior, double step_size, PsgldState& state,
                Rng& rng);

/// pSGLD on log p = −N·NLL − (weight_decay/2)|w|²; stores end-of-epoch samples per the cadence.
TrainResult train_sgld(const Objective& objective, const Schedule& schedule, RunSeed run, const Validator& validate = {});

/// SGD with the preconditioning then cyclic schedule, collecting a snapshot at
/// each cycle end. `variant` is kSwa or kSwag; swag needs at least two snapshots.
TrainResult train_swa_swag(const Objective& objective, const Schedule& schedule, Mode variant, RunSeed run,
                           const Validator& validate = {});

/// Dispatches on `mode`; an ensemble uses schedule.ensemble_size members
/// member_seed(run.seed, m).
TrainResult train(Mode mode, const Objective& objective, const Schedule& schedule, RunSeed run,
                  const Validator& validate = {});

/// Member 0 reuses `seed` so the first member equals the single-model run.
RunSeed member_seed(std::uint64_t seed, std::size_t member);

}  // namespace molrel::bayes
