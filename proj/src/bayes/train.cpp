#include "molrel/bayes/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "molrel/autodiff/optimizer.hpp"
#include "molrel/core/error.hpp"

namespace molrel::bayes {
namespace {

constexpr double kSigmaFloor = 1e-8;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Shuffled mini-batch passes over [0, N); the final partial batch is kept.
class EpochLoop {
 public:
  EpochLoop(std::size_t examples, std::size_t batch_size, Rng shuffle)
      : order_(examples), batch_size_(batch_size), rng_(std::move(shuffle)) {
    if (examples == 0) throw DataError("training set is empty");
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }

  std::size_t iterations() const { return (order_.size() + batch_size_ - 1) / batch_size_; }

  /// `step(iter, batch)` returns the batch objective; a non-finite value or a
  /// NumericError from the step aborts with the epoch index.
  template <class Step>
  double run(std::size_t epoch, Step&& step) {
    std::shuffle(order_.begin(), order_.end(), rng_);
    double total = 0.0;
    for (std::size_t it = 0; it < iterations(); ++it) {
      const std::size_t start = it * batch_size_;
      const std::size_t len = std::min(batch_size_, order_.size() - start);
      const std::span<const std::size_t> batch(order_.data() + start, len);
      double loss = 0.0;
      try {
        loss = step(it, batch);
      } catch (const NumericError& e) {
        throw NumericError("diverged at epoch " + std::to_string(epoch) + ": " + e.what());
      }
      if (!std::isfinite(loss)) throw NumericError("diverged at epoch " + std::to_string(epoch) + ": non-finite loss");
      total += loss * static_cast<double>(len);
    }
    return total / static_cast<double>(order_.size());
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  Rng rng_;
};

std::vector<double> initial_params(const Objective& objective, RunSeed run) {
  Rng rng = make_rng(run.seed, Stream::kInit, run.member);
  std::vector<double> w = objective.initial_params(rng);
  if (w.size() != objective.param_count()) throw ShapeError("initial parameters do not match param_count()");
  return w;
}

void record_epoch(TrainLog& log, std::size_t epoch, double lr, double loss, const Validator& validate,
                  std::span<const double> w) {
  for (double v : w)
    if (!std::isfinite(v)) throw NumericError("diverged at epoch " + std::to_string(epoch) + ": non-finite parameters");
  EpochRecord r{epoch, lr, loss, std::nullopt};
  if (validate) {
    try {
      r.valid_metric = validate(w);
    } catch (const NumericError& e) {
      throw NumericError("diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
  }
  log.epochs.push_back(r);
}

Posterior make_posterior(Mode mode, const Objective& objective) {
  Posterior p;
  p.mode = mode;
  p.layout_digest = objective.layout_digest();
  return p;
}

TrainResult run_adam(const Objective& objective, const Schedule& schedule, RunSeed run, const Validator& validate,
                     bool with_dropout, Mode mode) {
  schedule.validate(mode);
  std::vector<double> w = initial_params(objective, run);
  ad::Optimizer opt({ad::OptimizerKind::kAdam, schedule.learning_rate, schedule.weight_decay}, w.size());
  Rng dropout_rng = make_rng(run.seed, Stream::kDropout, run.member);
  const gnn::DropoutSpec dropout{with_dropout ? schedule.dropout : 0.0, with_dropout ? &dropout_rng : nullptr};
  EpochLoop loop(objective.example_count(), schedule.batch_size, make_rng(run.seed, Stream::kShuffle, run.member));

  TrainLog log;
  std::vector<double> grad;
  for (std::size_t epoch = 1; epoch <= schedule.epochs; ++epoch) {
    const double lr = schedule.step_lr(epoch);
    opt.set_learning_rate(lr);
    const double loss = loop.run(epoch, [&](std::size_t, std::span<const std::size_t> batch) {
      const double l = objective.loss_and_gradient(w, batch, grad, dropout);
      if (std::isfinite(l)) {
        clip_gradient(grad, schedule.grad_clip_norm);
        opt.step(w, grad);
      }
      return l;
    });
    record_epoch(log, epoch, lr, loss, validate, w);
  }
  TrainResult result{make_posterior(mode, objective), {std::move(log)}};
  result.posterior.points.push_back(std::move(w));
  if (with_dropout) result.posterior.dropout = schedule.dropout;
  return result;
}

}  // namespace

void clip_gradient(std::vector<double>& grad, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (double& g : grad) g *= s;
  }
}

nlohmann::json to_json(const TrainLog& log) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const EpochRecord& r : log.epochs) {
    nlohmann::json e = {{"epoch", r.epoch}, {"lr", r.learning_rate}, {"train_loss", r.train_loss}};
    e["valid_metric"] = r.valid_metric && std::isfinite(*r.valid_metric) ? nlohmann::json(*r.valid_metric) : nlohmann::json();
    epochs.push_back(std::move(e));
  }
  return {{"epochs", std::move(epochs)}, {"warnings", log.warnings}};
}

RunSeed member_seed(std::uint64_t seed, std::size_t member) { return RunSeed{seed, member}; }

TrainResult train_map(const Objective& objective, const Schedule& schedule, RunSeed run, const Validator& validate,
                      bool with_dropout) {
  return run_adam(objective, schedule, run, validate, with_dropout, Mode::kNone);
}

TrainResult train_mc_dropout(const Objective& objective, const Schedule& schedule, RunSeed run,
                             const Validator& validate) {
  return run_adam(objective, schedule, run, validate, true, Mode::kMcDropout);
}

TrainResult train_ensemble(const Objective& objective, const Schedule& schedule, std::span<const RunSeed> members,
                           const Validator& validate) {
  schedule.validate(Mode::kNone);
  if (members.size() < 2) throw ConfigError("ensemble needs at least 2 members, got " + std::to_string(members.size()));
  TrainResult result{make_posterior(Mode::kEnsemble, objective), {}};
  for (std::size_t m = 0; m < members.size(); ++m) {
    try {
      TrainResult member = run_adam(objective, schedule, members[m], validate, false, Mode::kNone);
      result.posterior.points.push_back(std::move(member.posterior.points.front()));
      result.logs.push_back(std::move(member.logs.front()));
    } catch (const NumericError& e) {
      TrainLog failed;
      failed.warnings.push_back("member " + std::to_string(m) + " excluded: " + e.what());
      result.logs.push_back(std::move(failed));
    }
  }
  if (result.posterior.points.size() < 2) {
    throw NumericError("ensemble: only " + std::to_string(result.posterior.points.size()) + " of " +
                       std::to_string(members.size()) + " members trained without diverging");
  }
  return result;
}

double bbb_objective(const Objective& objective, const BbbFactors& factors, std::span<const std::size_t> examples,
                     std::span<const std::vector<double>> noise, double kl_scale, double prior_sigma,
                     BbbGradient& grad) {
  const std::size_t n = factors.mu.size();
  if (factors.rho.size() != n || n != objective.param_count()) throw ShapeError("bbb_objective: factor length mismatch");
  if (noise.empty()) throw ConfigError("bbb_objective: need at least one noise draw");
  const std::vector<double> sigma = factors.sigma();
  const double inv_draws = 1.0 / static_cast<double>(noise.size());
  grad.mu.assign(n, 0.0);
  grad.rho.assign(n, 0.0);
  std::vector<double> w(n);
  std::vector<double> g;
  double total = 0.0;
  for (const std::vector<double>& z : noise) {
    if (z.size() != n) throw ShapeError("bbb_objective: noise draw length mismatch");
    for (std::size_t i = 0; i < n; ++i) w[i] = factors.mu[i] + sigma[i] * z[i];
    total += objective.loss_and_gradient(w, examples, g, {});
    for (std::size_t i = 0; i < n; ++i) {
      grad.mu[i] += g[i] * inv_draws;
      grad.rho[i] += g[i] * z[i] * logistic(factors.rho[i]) * inv_draws;
    }
  }
  total *= inv_draws;
  if (kl_scale > 0.0) {
    const double c = kl_scale / static_cast<double>(objective.example_count());
    const double inv_var0 = 1.0 / (prior_sigma * prior_sigma);
    total += c * kl_diag_gaussians(factors.mu, sigma, prior_sigma);
    for (std::size_t i = 0; i < n; ++i) {
      grad.mu[i] += c * factors.mu[i] * inv_var0;
      grad.rho[i] += c * (-1.0 / sigma[i] + sigma[i] * inv_var0) * logistic(factors.rho[i]);
    }
  }
  return total;
}

TrainResult train_bbb(const Objective& objective, const Schedule& schedule, RunSeed run, const Validator& validate) {
  schedule.validate(Mode::kBbb);
  BbbFactors factors;
  factors.mu = initial_params(objective, run);
  const std::size_t n = factors.mu.size();
  factors.rho.assign(n, softplus_inverse(schedule.bbb_sigma_init));
  const double rho_floor = softplus_inverse(kSigmaFloor);

  ad::Optimizer opt({ad::OptimizerKind::kAdam, schedule.learning_rate, 0.0}, 2 * n);
  Rng noise_rng = make_rng(run.seed, Stream::kBbbNoise, run.member);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> noise(schedule.bbb_train_samples, std::vector<double>(n));
  EpochLoop loop(objective.example_count(), schedule.batch_size, make_rng(run.seed, Stream::kShuffle, run.member));

  TrainLog log;
  BbbGradient grad;
  std::vector<double> theta(2 * n), theta_grad(2 * n);
  std::size_t clamps = 0;
  for (std::size_t epoch = 1; epoch <= schedule.epochs; ++epoch) {
    const double lr = schedule.step_lr(epoch);
    opt.set_learning_rate(lr);
    const double loss = loop.run(epoch, [&](std::size_t, std::span<const std::size_t> batch) {
      for (auto& z : noise)
        for (double& v : z) v = normal(noise_rng);
      const double l = bbb_objective(objective, factors, batch, noise, schedule.kl_scale, schedule.prior_sigma, grad);
      if (!std::isfinite(l)) return l;
      std::copy(factors.mu.begin(), factors.mu.end(), theta.begin());
      std::copy(factors.rho.begin(), factors.rho.end(), theta.begin() + static_cast<std::ptrdiff_t>(n));
      std::copy(grad.mu.begin(), grad.mu.end(), theta_grad.begin());
      std::copy(grad.rho.begin(), grad.rho.end(), theta_grad.begin() + static_cast<std::ptrdiff_t>(n));
      clip_gradient(theta_grad, schedule.grad_clip_norm);
      opt.step(theta, theta_grad);
      std::copy(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(n), factors.mu.begin());
      for (std::size_t i = 0; i < n; ++i) {
        double r = theta[n + i];
        if (r < rho_floor) {
          r = rho_floor;
          ++clamps;
        }
        factors.rho[i] = r;
      }
      return l;
    });
    record_epoch(log, epoch, lr, loss, validate, factors.mu);
  }
  if (clamps > 0) log.warnings.push_back("sigma clamped at 1e-8 " + std::to_string(clamps) + " times");
  TrainResult result{make_posterior(Mode::kBbb, objective), {std::move(log)}};
  result.posterior.bbb = std::move(factors);
  return result;
}

void psgld_step(std::span<double> w, std::span<const double> grad_log_posterior, double step_size, PsgldState& state,
                std::span<const double> z) {
  const std::size_t n = w.size();
  if (grad_log_posterior.size() != n || z.size() != n) throw ShapeError("psgld_step: length mismatch");
  std::vector<double> v;
  if (state.preconditioned) v = state.v.empty() ? std::vector<double>(n, 0.0) : state.v;
  if (v.size() != (state.preconditioned ? n : 0)) throw ShapeError("psgld_step: preconditioner length mismatch");
  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad_log_posterior[i];
    double precond = 1.0;
    if (state.preconditioned) {
      v[i] = state.alpha * v[i] + (1.0 - state.alpha) * g * g;
      precond = 1.0 / (std::sqrt(v[i]) + state.lambda);
    }
    next[i] = w[i] + 0.5 * step_size * precond * g + std::sqrt(step_size * precond) * z[i];
    if (!std::isfinite(next[i])) throw NumericError("psgld_step: non-finite update at coordinate " + std::to_string(i));
  }
  std::copy(next.begin(), next.end(), w.begin());
  if (state.preconditioned) state.v = std::move(v);
}

void psgld_step(std::span<double> w, std::span<const double> grad_log_posterior, double step_size, PsgldState& state,
                Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> z(w.size());
  for (double& v : z) v = normal(rng);
  psgld_step(w, grad_log_posterior, step_size, state, z);
}

TrainResult train_sgld(const Objective& objective, const Schedule& schedule, RunSeed run, const Validator& validate) {
  schedule.validate(Mode::kSgld);
  std::vector<double> w = initial_params(objective, run);
  const double n_train = static_cast<double>(objective.example_count());
  PsgldState state{{}, schedule.sgld_alpha, schedule.sgld_lambda, true};
  Rng noise_rng = make_rng(run.seed, Stream::kSgldNoise, run.member);
  EpochLoop loop(objective.example_count(), schedule.batch_size, make_rng(run.seed, Stream::kShuffle, run.member));

  TrainResult result{make_posterior(Mode::kSgld, objective), {}};
  TrainLog log;
  std::vector<double> grad, grad_lp(w.size());
  for (std::size_t epoch = 1; epoch <= schedule.epochs; ++epoch) {
    const double lr = schedule.step_lr(epoch);
    const double loss = loop.run(epoch, [&](std::size_t, std::span<const std::size_t> batch) {
      const double l = objective.loss_and_gradient(w, batch, grad, {});
      if (!std::isfinite(l)) return l;
      for (std::size_t i = 0; i < w.size(); ++i) grad_lp[i] = -n_train * grad[i] - schedule.weight_decay * w[i];
      psgld_step(w, grad_lp, lr, state, noise_rng);
      return l;
    });
    record_epoch(log, epoch, lr, loss, validate, w);
    if (schedule.sgld_sample_epoch(epoch)) result.posterior.points.push_back(w);
  }
  if (result.posterior.points.empty()) throw ConfigError("sgld: schedule stores no samples");
  result.logs.push_back(std::move(log));
  return result;
}

TrainResult train_swa_swag(const Objective& objective, const Schedule& schedule, Mode variant, RunSeed run,
                           const Validator& validate) {
  if (variant != Mode::kSwa && variant != Mode::kSwag) throw ConfigError("train_swa_swag: variant must be swa or swag");
  schedule.validate(variant);
  std::vector<double> w = initial_params(objective, run);
  ad::Optimizer opt({ad::OptimizerKind::kSgd, schedule.swa_lr_initial, schedule.weight_decay}, w.size());
  EpochLoop loop(objective.example_count(), schedule.batch_size, make_rng(run.seed, Stream::kShuffle, run.member));
  const std::size_t iters = loop.iterations();

  SwagMoments moments;
  moments.rank = schedule.swag_rank;
  TrainLog log;
  std::vector<double> grad;
  for (std::size_t epoch = 1; epoch <= schedule.swa_epochs; ++epoch) {
    const double loss = loop.run(epoch, [&](std::size_t it, std::span<const std::size_t> batch) {
      const double l = objective.loss_and_gradient(w, batch, grad, {});
      if (!std::isfinite(l)) return l;
      opt.set_learning_rate(schedule.swa_lr(epoch, it, iters));
      clip_gradient(grad, schedule.grad_clip_norm);
      opt.step(w, grad);
      return l;
    });
    record_epoch(log, epoch, schedule.swa_lr(epoch, 0, iters), loss, validate, w);
    if (schedule.swa_snapshot_epoch(epoch)) swag_collect(moments, w);
  }
  TrainResult result{make_posterior(variant, objective), {}};
  if (variant == Mode::kSwa) {
    if (moments.snapshot_count == 0) throw ConfigError("swa: schedule collects no snapshots");
    result.posterior.points.push_back(moments.mean);
  } else {
    if (moments.snapshot_count < 2) {
      throw ConfigError("swag needs at least 2 snapshots, schedule collects " + std::to_string(moments.snapshot_count));
    }
    result.posterior.swag = std::move(moments);
  }
  result.logs.push_back(std::move(log));
  return result;
}

TrainResult train(Mode mode, const Objective& objective, const Schedule& schedule, RunSeed run,
                  const Validator& validate) {
  switch (mode) {
    case Mode::kNone: return train_map(objective, schedule, run, validate);
    case Mode::kEnsemble: {
      std::vector<RunSeed> members;
      for (std::size_t m = 0; m < schedule.ensemble_size; ++m) members.push_back(member_seed(run.seed, m));
      return train_ensemble(objective, schedule, members, validate);
    }
    case Mode::kMcDropout: return train_mc_dropout(objective, schedule, run, validate);
    case Mode::kBbb: return train_bbb(objective, schedule, run, validate);
    case Mode::kSgld: return train_sgld(objective, schedule, run, validate);
    case Mode::kSwa:
    case Mode::kSwag: return train_swa_swag(objective, schedule, mode, run, validate);
  }
  throw ConfigError("unknown mode");
}

}  // namespace molrel::bayes
