#include "molrel/autodiff/finite_diff.hpp"

#include <algorithm>
#include <cmath>

#include "molrel/core/error.hpp"

namespace molrel::ad {

std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> params, double h) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_grad: step must be positive");
  std::vector<double> w(params.begin(), params.end());
  const double first = f(w);
  const double second = f(w);
  if (first != second) throw NumericError("finite_diff_grad: function is not deterministic");
  std::vector<double> grad(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double saved = w[i];
    w[i] = saved + h;
    const double up = f(w);
    w[i] = saved - h;
    const double down = f(w);
    w[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double max_relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw ShapeError("max_relative_error: length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace molrel::ad
