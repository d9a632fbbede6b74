#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molrel/autodiff/tensor.hpp"
#include "molrel/core/random.hpp"
#include "molrel/gnn/config.hpp"

namespace molrel::gnn {

struct ParamEntry {
  std::string name;
  ad::Shape shape;
  std::size_t offset = 0;
  std::size_t size = 0;
  bool bias = false;
  std::size_t fan_in = 0;  // Glorot fans; a split attention vector uses the fans of the whole vector
  std::size_t fan_out = 0;
};

/// Named blocks of the flat parameter vector, in a fixed coordinate order:
/// embedding, layers 0..L-1, readout, classifier.
class ParamLayout {
 public:
  explicit ParamLayout(const ModelConfig& config);

  const std::vector<ParamEntry>& entries() const noexcept { return entries_; }
  std::size_t total() const noexcept { return total_; }
  /// Index of an entry by name; throws Error when absent.
  std::size_t index(std::string_view name) const;
  const ParamEntry& entry(std::string_view name) const { return entries_[index(name)]; }
  /// FNV-1a over names and shapes; changes whenever the coordinate order does.
  std::uint64_t digest() const;

  std::span<double> slice(std::span<double> flat, std::string_view name) const;
  std::span<const double> slice(std::span<const double> flat, std::string_view name) const;

 private:
  void add(std::string name, ad::Shape shape, bool bias = false, std::size_t fan_in = 0, std::size_t fan_out = 0);

  std::vector<ParamEntry> entries_;
  std::size_t total_ = 0;
};

/// Glorot-uniform weights (limit sqrt(6 / (fan_in + fan_out))), zero biases.
std::vector<double> init_params(const ParamLayout& layout, Rng& rng);

}  // namespace molrel::gnn
