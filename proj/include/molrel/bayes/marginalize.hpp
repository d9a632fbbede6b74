#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "molrel/bayes/objective.hpp"
#include "molrel/bayes/posterior.hpp"

namespace molrel::bayes {

/// Probability-space average over weight draws, row-major (rows x tasks).
struct PredictiveDistribution {
  std::size_t rows = 0;
  std::size_t tasks = 0;
  std::vector<double> mean;         // ȳ
  std::vector<double> uncertainty;  // √(ȳ(1−ȳ))
  std::size_t draws = 0;
};

double sigmoid(double x);

/// Builds the distribution from per-draw probabilities using compensated sums.
PredictiveDistribution average_probabilities(std::size_t rows, std::size_t tasks,
                                             std::span<const std::vector<double>> draws);

/// Point modes use their single point; sample sets use every member; bbb, swag
/// and mcdo take `n_samples` draws (seeded from `seed`), swag with covariance
/// scale `swag_scale`. Throws ConfigError when n_samples is zero for a sampling mode.
PredictiveDistribution marginalize(const Posterior& posterior, const Predictor& predictor, std::size_t n_samples,
                                   std::uint64_t seed, double swag_scale = 1.0);

/// ȳ = (1/T) Σ sigmoid(logits) under T fresh dropout masks of rate p.
PredictiveDistribution mc_dropout_predict(const Predictor& predictor, std::span<const double> w, std::size_t samples,
                                          double p, Rng& rng);

/// Default draw count per mode: 30 for mcdo and swag, 100 for bbb, 1 otherwise.
std::size_t default_sample_count(Mode mode, const Schedule& schedule);

/// Mean of the members' ȳ (ensemble of posteriors).
PredictiveDistribution average_predictives(std::span<const PredictiveDistribution> members);

}  // namespace molrel::bayes
