#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "json.hpp"

namespace molrel::gnn {

enum class Architecture { kGcn, kGin, kSage, kGat, kGatedGcn };

std::string_view architecture_name(Architecture arch);
/// Accepts "gcn", "gin", "sage", "gat", "gatedgcn"; throws ConfigError otherwise.
Architecture architecture_from_name(std::string_view name);

struct ModelConfig {
  Architecture architecture = Architecture::kGcn;
  std::size_t hidden_dim = 128;  // d
  std::size_t graph_dim = 256;   // d_G
  std::size_t layers = 4;        // L
  std::size_t heads = 4;         // K, gat only
  std::size_t tasks = 1;         // T
  std::size_t node_features = 40;
  std::size_t edge_features = 4;

  /// Throws ConfigError on zero dims or, for gat, heads not dividing hidden_dim.
  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace molrel::gnn
