#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "molrel/bayes/schedule.hpp"
#include "molrel/core/random.hpp"

namespace molrel::bayes {

double softplus(double rho);
/// Inverse of softplus for sigma > 0.
double softplus_inverse(double sigma);

/// Mean-field Gaussian factors; σ_i = softplus(ρ_i).
struct BbbFactors {
  std::vector<double> mu;
  std::vector<double> rho;

  std::vector<double> sigma() const;
};

/// Σ_i [ln(σ0/σ_i) + (σ_i² + μ_i²)/(2σ0²) − 1/2], KL of N(μ, σ²) from N(0, σ0²).
/// Throws ConfigError on a non-positive σ_i or σ0.
double kl_diag_gaussians(std::span<const double> mu, std::span<const double> sigma, double prior_sigma);

/// Running first and second moments of snapshots plus the last `rank` deviations.
struct SwagMoments {
  std::vector<double> mean;
  std::vector<double> sq_mean;
  std::vector<std::vector<double>> deviations;  // oldest first, each w − mean after its own update
  std::size_t snapshot_count = 0;
  std::size_t rank = 20;

  /// max(E[w²] − w̄², 1e-30) per coordinate.
  std::vector<double> diagonal() const;
};

/// (k·mean + w)/(k+1); with k = 0 the result is w. Throws ShapeError on length mismatch.
std::vector<double> swa_update(std::span<const double> mean, std::span<const double> w, std::size_t k);

/// Folds snapshot w into the moments (initializing them on the first call).
void swag_collect(SwagMoments& moments, std::span<const double> w);

/// w̄ + scale·[√diag ⊙ z1 / √2 + D̂ z2 / √(2(K−1))]. With K < 2 the low-rank
/// term is dropped. z1 has one entry per parameter, z2 one per deviation.
std::vector<double> swag_sample(const SwagMoments& moments, double scale, std::span<const double> z1,
                                std::span<const double> z2);
std::vector<double> swag_sample(const SwagMoments& moments, double scale, Rng& rng);

struct Posterior {
  Mode mode = Mode::kNone;
  std::vector<std::vector<double>> points;  // none, mcdo, swa: one; ensemble, sgld: all samples
  BbbFactors bbb;                           // bbb only
  SwagMoments swag;                         // swag only
  double dropout = 0.0;                     // residual dropout applied at prediction (mcdo)
  std::string layout_digest;
  nlohmann::json meta = nlohmann::json::object();  // caller-supplied provenance (config digest, seed, ...)

  std::size_t param_count() const;
  /// Checks the per-mode payload invariants; throws DataError.
  void validate() const;
};

/// Binary artifact with magic "MRPOST01"; the header carries mode, sizes,
/// layout digest and `meta`.
void save_posterior(const std::filesystem::path& path, const Posterior& posterior);
Posterior load_posterior(const std::filesystem::path& path);

}  // namespace molrel::bayes
