#include "molrel/bayes/marginalize.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "molrel/core/error.hpp"

namespace molrel::bayes {
namespace {

// Sub-stream index for prediction-time draws, disjoint from training member indices.
constexpr std::uint64_t kPredictionStream = std::uint64_t{1} << 32;

/// Per-cell Neumaier summation of probabilities.
class Accumulator {
 public:
  Accumulator(std::size_t rows, std::size_t tasks) : rows_(rows), tasks_(tasks), sum_(rows * tasks), comp_(rows * tasks) {}

  void add(std::span<const double> probabilities) {
    if (probabilities.size() != sum_.size()) throw ShapeError("marginalize: draw has the wrong number of cells");
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      const double x = probabilities[i];
      const double t = sum_[i] + x;
      comp_[i] += std::abs(sum_[i]) >= std::abs(x) ? (sum_[i] - t) + x : (x - t) + sum_[i];
      sum_[i] = t;
    }
    ++draws_;
  }

  void add_logits(std::span<const double> logits) {
    std::vector<double> p(logits.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = sigmoid(logits[i]);
    add(p);
  }

  PredictiveDistribution finish() const {
    if (draws_ == 0) throw ConfigError("marginalize: no draws");
    PredictiveDistribution out{rows_, tasks_, std::vector<double>(sum_.size()), std::vector<double>(sum_.size()), draws_};
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      const double y = std::clamp((sum_[i] + comp_[i]) / static_cast<double>(draws_), 0.0, 1.0);
      if (!std::isfinite(y)) throw NumericError("marginalize: non-finite mean probability");
      out.mean[i] = y;
      out.uncertainty[i] = std::sqrt(y * (1.0 - y));
    }
    return out;
  }

 private:
  std::size_t rows_, tasks_;
  std::vector<double> sum_, comp_;
  std::size_t draws_ = 0;
};

void require_samples(std::size_t n, const char* mode) {
  if (n < 1) throw ConfigError(std::string("marginalize: ") + mode + " needs at least one draw");
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

PredictiveDistribution average_probabilities(std::size_t rows, std::size_t tasks,
                                             std::span<const std::vector<double>> draws) {
  Accumulator acc(rows, tasks);
  for (const auto& d : draws) acc.add(d);
  return acc.finish();
}

PredictiveDistribution mc_dropout_predict(const Predictor& predictor, std::span<const double> w, std::size_t samples,
                                          double p, Rng& rng) {
  require_samples(samples, "mc dropout");
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("mc dropout rate must be in [0, 1)");
  Accumulator acc(predictor.rows(), predictor.tasks());
  const gnn::DropoutSpec dropout{p, &rng};
  for (std::size_t t = 0; t < samples; ++t) acc.add_logits(predictor.logits(w, dropout));
  return acc.finish();
}

PredictiveDistribution marginalize(const Posterior& posterior, const Predictor& predictor, std::size_t n_samples,
                                   std::uint64_t seed, double swag_scale) {
  posterior.validate();
  Accumulator acc(predictor.rows(), predictor.tasks());
  switch (posterior.mode) {
    case Mode::kNone:
    case Mode::kSwa:
      acc.add_logits(predictor.logits(posterior.points.front(), {}));
      break;
    case Mode::kEnsemble:
    case Mode::kSgld:
      for (const auto& w : posterior.points) acc.add_logits(predictor.logits(w, {}));
      break;
    case Mode::kMcDropout: {
      Rng rng = make_rng(seed, Stream::kDropout, kPredictionStream);
      return mc_dropout_predict(predictor, posterior.points.front(), n_samples, posterior.dropout, rng);
    }
    case Mode::kBbb: {
      require_samples(n_samples, "bbb");
      Rng rng = make_rng(seed, Stream::kBbbNoise, kPredictionStream);
      std::normal_distribution<double> normal;
      const std::vector<double> sigma = posterior.bbb.sigma();
      std::vector<double> w(sigma.size());
      for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = posterior.bbb.mu[i] + sigma[i] * normal(rng);
        acc.add_logits(predictor.logits(w, {}));
      }
      break;
    }
    case Mode::kSwag: {
      require_samples(n_samples, "swag");
      Rng rng = make_rng(seed, Stream::kSwagDraw, kPredictionStream);
      for (std::size_t s = 0; s < n_samples; ++s) acc.add_logits(predictor.logits(swag_sample(posterior.swag, swag_scale, rng), {}));
      break;
    }
  }
  return acc.finish();
}

std::size_t default_sample_count(Mode mode, const Schedule& schedule) {
  switch (mode) {
    case Mode::kMcDropout: return schedule.mc_samples;
    case Mode::kBbb: return schedule.bbb_eval_samples;
    case Mode::kSwag: return schedule.swag_samples;
    default: return 1;
  }
}

PredictiveDistribution average_predictives(std::span<const PredictiveDistribution> members) {
  if (members.empty()) throw ConfigError("average_predictives: no members");
  Accumulator acc(members.front().rows, members.front().tasks);
  std::size_t draws = 0;
  for (const auto& m : members) {
    if (m.rows != members.front().rows || m.tasks != members.front().tasks)
      throw ShapeError("average_predictives: member shapes differ");
    acc.add(m.mean);
    draws += m.draws;
  }
  PredictiveDistribution out = acc.finish();
  out.draws = draws;
  return out;
}

}  // namespace molrel::bayes
