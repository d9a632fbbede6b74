#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "molrel/core/random.hpp"
#include "molrel/gnn/model.hpp"

namespace molrel::bayes {

/// Training problem seen by every mode: a flat parameter vector and a mean
/// negative log-likelihood over mini-batches of example indices in [0, N).
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t param_count() const = 0;
  virtual std::size_t example_count() const = 0;
  virtual std::vector<double> initial_params(Rng& rng) const = 0;
  /// Mean NLL over `examples`; `grad` is resized to param_count() and overwritten.
  virtual double loss_and_gradient(std::span<const double> w, std::span<const std::size_t> examples,
                                   std::vector<double>& grad, const gnn::DropoutSpec& dropout) const = 0;
  /// Identifies the coordinate order of w; stored with posteriors.
  virtual std::string layout_digest() const { return {}; }
};

/// Logits of one weight draw over a fixed input set, row-major (rows x tasks).
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t tasks() const = 0;
  virtual std::vector<double> logits(std::span<const double> w, const gnn::DropoutSpec& dropout) const = 0;
};

}  // namespace molrel::bayes
