#include "molrel/bayes/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "molrel/core/artifact.hpp"
#include "molrel/core/error.hpp"

namespace molrel::bayes {
namespace {

constexpr double kDiagonalFloor = 1e-30;
constexpr std::string_view kPosteriorMagic = "MRPOST01";

void check_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": length " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

double softplus(double rho) { return rho > 30.0 ? rho : std::log1p(std::exp(rho)); }

double softplus_inverse(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("softplus_inverse: sigma must be > 0");
  return sigma > 30.0 ? sigma : sigma + std::log(-std::expm1(-sigma));
}

std::vector<double> BbbFactors::sigma() const {
  std::vector<double> out(rho.size());
  std::transform(rho.begin(), rho.end(), out.begin(), softplus);
  return out;
}

double kl_diag_gaussians(std::span<const double> mu, std::span<const double> sigma, double prior_sigma) {
  check_same_length(mu.size(), sigma.size(), "kl_diag_gaussians");
  if (!(prior_sigma > 0.0)) throw ConfigError("kl_diag_gaussians: prior sigma must be > 0");
  const double inv_two_var0 = 1.0 / (2.0 * prior_sigma * prior_sigma);
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double s = sigma[i];
    if (!(s > 0.0)) throw ConfigError("kl_diag_gaussians: sigma[" + std::to_string(i) + "] must be > 0");
    kl += std::log(prior_sigma / s) + (s * s + mu[i] * mu[i]) * inv_two_var0 - 0.5;
  }
  return kl;
}

std::vector<double> SwagMoments::diagonal() const {
  std::vector<double> out(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) out[i] = std::max(sq_mean[i] - mean[i] * mean[i], kDiagonalFloor);
  return out;
}

std::vector<double> swa_update(std::span<const double> mean, std::span<const double> w, std::size_t k) {
  check_same_length(mean.size(), w.size(), "swa_update");
  const double kk = static_cast<double>(k);
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = (kk * mean[i] + w[i]) / (kk + 1.0);
  return out;
}

void swag_collect(SwagMoments& moments, std::span<const double> w) {
  if (moments.snapshot_count == 0) {
    moments.mean.assign(w.size(), 0.0);
    moments.sq_mean.assign(w.size(), 0.0);
    moments.deviations.clear();
  }
  std::vector<double> sq(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) sq[i] = w[i] * w[i];
  moments.mean = swa_update(moments.mean, w, moments.snapshot_count);
  moments.sq_mean = swa_update(moments.sq_mean, sq, moments.snapshot_count);
  ++moments.snapshot_count;
  std::vector<double> dev(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) dev[i] = w[i] - moments.mean[i];
  moments.deviations.push_back(std::move(dev));
  while (moments.deviations.size() > moments.rank) moments.deviations.erase(moments.deviations.begin());
}

std::vector<double> swag_sample(const SwagMoments& moments, double scale, std::span<const double> z1,
                                std::span<const double> z2) {
  const std::size_t n = moments.mean.size();
  const std::size_t k = moments.deviations.size();
  check_same_length(z1.size(), n, "swag_sample z1");
  const std::vector<double> diag = moments.diagonal();
  std::vector<double> w(moments.mean);
  const double half = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < n; ++i) w[i] += scale * half * std::sqrt(diag[i]) * z1[i];
  if (k >= 2) {
    check_same_length(z2.size(), k, "swag_sample z2");
    const double c = scale / std::sqrt(2.0 * static_cast<double>(k - 1));
    for (std::size_t j = 0; j < k; ++j) {
      const double coeff = c * z2[j];
      const std::vector<double>& d = moments.deviations[j];
      for (std::size_t i = 0; i < n; ++i) w[i] += coeff * d[i];
    }
  }
  return w;
}

std::vector<double> swag_sample(const SwagMoments& moments, double scale, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> z1(moments.mean.size());
  for (double& z : z1) z = normal(rng);
  std::vector<double> z2(moments.deviations.size() >= 2 ? moments.deviations.size() : 0);
  for (double& z : z2) z = normal(rng);
  return swag_sample(moments, scale, z1, z2);
}

std::size_t Posterior::param_count() const {
  switch (mode) {
    case Mode::kBbb: return bbb.mu.size();
    case Mode::kSwag: return swag.mean.size();
    default: return points.empty() ? 0 : points.front().size();
  }
}

void Posterior::validate() const {
  auto fail = [&](const std::string& what) {
    throw DataError("posterior (" + std::string(mode_name(mode)) + "): " + what);
  };
  const std::size_t n = param_count();
  if (n == 0) fail("empty parameter vector");
  switch (mode) {
    case Mode::kBbb:
      if (bbb.rho.size() != n) fail("mu and rho lengths differ");
      for (double r : bbb.rho)
        if (!(softplus(r) > 0.0)) fail("non-positive sigma");
      break;
    case Mode::kSwag:
      if (swag.sq_mean.size() != n) fail("moment lengths differ");
      if (swag.snapshot_count < 2) fail("fewer than two snapshots");
      if (swag.deviations.size() > swag.rank) fail("more deviation columns than the rank");
      for (const auto& d : swag.deviations)
        if (d.size() != n) fail("deviation length differs");
      break;
    case Mode::kEnsemble:
    case Mode::kSgld:
      if (points.empty()) fail("empty sample set");
      [[fallthrough]];
    default:
      if ((mode == Mode::kNone || mode == Mode::kMcDropout || mode == Mode::kSwa) && points.size() != 1)
        fail("point modes hold exactly one point");
      for (const auto& p : points)
        if (p.size() != n) fail("sample lengths differ");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout out of range");
}

void save_posterior(const std::filesystem::path& path, const Posterior& posterior) {
  posterior.validate();
  Artifact a;
  a.magic = std::string(kPosteriorMagic);
  a.header = {{"kind", "posterior"},
              {"mode", mode_name(posterior.mode)},
              {"param_count", posterior.param_count()},
              {"layout_digest", posterior.layout_digest},
              {"dropout", posterior.dropout},
              {"meta", posterior.meta}};
  auto append = [&](const std::vector<double>& v) { a.payload.insert(a.payload.end(), v.begin(), v.end()); };
  switch (posterior.mode) {
    case Mode::kBbb:
      append(posterior.bbb.mu);
      append(posterior.bbb.rho);
      break;
    case Mode::kSwag:
      a.header["snapshot_count"] = posterior.swag.snapshot_count;
      a.header["rank"] = posterior.swag.rank;
      a.header["deviation_columns"] = posterior.swag.deviations.size();
      append(posterior.swag.mean);
      append(posterior.swag.sq_mean);
      for (const auto& d : posterior.swag.deviations) append(d);
      break;
    default:
      a.header["point_count"] = posterior.points.size();
      for (const auto& p : posterior.points) append(p);
  }
  write_artifact(path, a);
}

Posterior load_posterior(const std::filesystem::path& path) {
  const Artifact a = read_artifact(path, kPosteriorMagic);
  Posterior p;
  std::size_t n = 0;
  try {
    p.mode = mode_from_name(a.header.at("mode").get<std::string>());
    n = a.header.at("param_count").get<std::size_t>();
    p.layout_digest = a.header.at("layout_digest").get<std::string>();
    p.dropout = a.header.at("dropout").get<double>();
    p.meta = a.header.at("meta");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": malformed posterior header: " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  std::size_t cursor = 0;
  auto take = [&]() {
    if (cursor + n > a.payload.size()) throw DataError(path.string() + ": posterior payload is truncated");
    std::vector<double> v(a.payload.begin() + static_cast<std::ptrdiff_t>(cursor),
                          a.payload.begin() + static_cast<std::ptrdiff_t>(cursor + n));
    cursor += n;
    return v;
  };
  try {
    switch (p.mode) {
      case Mode::kBbb:
        p.bbb.mu = take();
        p.bbb.rho = take();
        break;
      case Mode::kSwag: {
        p.swag.snapshot_count = a.header.at("snapshot_count").get<std::size_t>();
        p.swag.rank = a.header.at("rank").get<std::size_t>();
        const auto columns = a.header.at("deviation_columns").get<std::size_t>();
        p.swag.mean = take();
        p.swag.sq_mean = take();
        for (std::size_t j = 0; j < columns; ++j) p.swag.deviations.push_back(take());
        break;
      }
      default: {
        const auto count = a.header.at("point_count").get<std::size_t>();
        for (std::size_t j = 0; j < count; ++j) p.points.push_back(take());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": malformed posterior header: " + e.what());
  }
  if (cursor != a.payload.size()) throw DataError(path.string() + ": posterior payload has trailing values");
  p.validate();
  return p;
}

}  // namespace molrel::bayes
