#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "molrel/metrics/metrics.hpp"

namespace molrel::testing {

/// O(N²) count over all positive–negative pairs; ties count one half.
inline double brute_force_auroc(std::span<const metrics::PredictionRecord> records) {
  double wins = 0.0, pairs = 0.0;
  for (const auto& p : records) {
    if (p.label != 1) continue;
    for (const auto& n : records) {
      if (n.label != 0) continue;
      pairs += 1.0;
      if (p.probability > n.probability) wins += 1.0;
      else if (p.probability == n.probability) wins += 0.5;
    }
  }
  return wins / pairs;
}

/// One pass: each record goes to the bin whose [low, high) range holds its
/// confidence (last bin closed), accumulating count, confidence and hits.
inline double direct_ece(std::span<const metrics::PredictionRecord> records, std::size_t bins = 10) {
  std::vector<double> count(bins, 0.0), conf(bins, 0.0), hits(bins, 0.0);
  for (const auto& r : records) {
    const double c = r.probability >= 0.5 ? r.probability : 1.0 - r.probability;
    for (std::size_t b = 0; b < bins; ++b) {
      const double low = 0.5 + 0.5 * static_cast<double>(b) / static_cast<double>(bins);
      const double high = 0.5 + 0.5 * static_cast<double>(b + 1) / static_cast<double>(bins);
      if (c >= low && (c < high || b + 1 == bins)) {
        count[b] += 1.0;
        conf[b] += c;
        hits[b] += (r.probability >= 0.5 ? 1 : 0) == r.label ? 1.0 : 0.0;
        break;
      }
    }
  }
  double total = 0.0;
  for (double c : count) total += c;
  double e = 0.0;
  for (std::size_t b = 0; b < bins; ++b)
    if (count[b] > 0) e += count[b] / total * std::abs(hits[b] / count[b] - conf[b] / count[b]);
  return e;
}

}  // namespace molrel::testing
