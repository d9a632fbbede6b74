#pragma once

// Test-only helpers: compare tape gradients against central differences.

#include <functional>
#include <random>
#include <vector>

#include "molrel/autodiff/finite_diff.hpp"
#include "molrel/autodiff/ops.hpp"
#include "molrel/autodiff/tape.hpp"

namespace molrel::testing {

using LossBuilder = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

struct GradCheck {
  std::vector<double> analytic;
  std::vector<double> numeric;
  double max_rel_error = 0.0;
};

inline std::vector<double> flatten(const std::vector<ad::Tensor>& ts) {
  std::vector<double> out;
  for (const auto& t : ts) out.insert(out.end(), t.data().begin(), t.data().end());
  return out;
}

inline std::vector<ad::Tensor> unflatten(const std::vector<ad::Tensor>& like, std::span<const double> flat) {
  std::vector<ad::Tensor> out;
  std::size_t off = 0;
  for (const auto& t : like) {
    std::vector<double> v(flat.begin() + off, flat.begin() + off + t.size());
    out.emplace_back(t.shape(), std::move(v));
    off += t.size();
  }
  return out;
}

/// Runs `build` on fresh tapes: once for backward(), then per coordinate for
/// the finite-difference oracle.
inline GradCheck check_gradients(const std::vector<ad::Tensor>& inputs, const LossBuilder& build, double h = 1e-5,
                                 double floor = 1e-7) {
  GradCheck out;
  {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const auto& t : inputs) vars.push_back(tape.parameter(t));
    ad::Var loss = build(tape, vars);
    auto grads = tape.backward(loss);
    for (const auto& v : vars) {
      const auto& g = grads.at(v.id);
      out.analytic.insert(out.analytic.end(), g.data().begin(), g.data().end());
    }
  }
  auto f = [&](std::span<const double> flat) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (auto& t : unflatten(inputs, flat)) vars.push_back(tape.parameter(std::move(t)));
    return build(tape, vars).value().item();
  };
  const auto base = flatten(inputs);
  out.numeric = ad::finite_diff_grad(f, base, h);
  out.max_rel_error = ad::max_relative_error(out.analytic, out.numeric, floor);
  return out;
}

inline ad::Tensor random_tensor(ad::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  ad::Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : t.data()) v = u(rng);
  return t;
}

/// Contracts an arbitrary tensor with fixed random weights so every output
/// element receives a distinct upstream gradient.
inline ad::Var weighted_sum(ad::Tape& tape, ad::Var x, std::uint64_t seed = 99) {
  std::mt19937_64 rng(seed);
  ad::Var w = tape.constant(random_tensor(x.shape(), rng));
  return ad::sum(ad::hadamard(x, w));
}

}  // namespace molrel::testing
