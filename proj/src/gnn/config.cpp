#include "molrel/gnn/config.hpp"

#include "molrel/core/error.hpp"

namespace molrel::gnn {

std::string_view architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::kGcn: return "gcn";
    case Architecture::kGin: return "gin";
    case Architecture::kSage: return "sage";
    case Architecture::kGat: return "gat";
    case Architecture::kGatedGcn: return "gatedgcn";
  }
  return "?";
}

Architecture architecture_from_name(std::string_view name) {
  for (auto a : {Architecture::kGcn, Architecture::kGin, Architecture::kSage, Architecture::kGat, Architecture::kGatedGcn}) {
    if (architecture_name(a) == name) return a;
  }
  throw ConfigError("unknown architecture '" + std::string(name) + "' (expected gcn, gin, sage, gat or gatedgcn)");
}

void ModelConfig::validate() const {
  if (hidden_dim == 0 || graph_dim == 0 || layers == 0 || tasks == 0 || node_features == 0 || edge_features == 0) {
    throw ConfigError("model dimensions, layer count and task count must be positive");
  }
  if (architecture == Architecture::kGat && (heads == 0 || hidden_dim % heads != 0)) {
    throw ConfigError("gat: heads (" + std::to_string(heads) + ") must divide hidden_dim (" + std::to_string(hidden_dim) + ")");
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"architecture", architecture_name(c.architecture)},
                     {"hidden_dim", c.hidden_dim},
                     {"graph_dim", c.graph_dim},
                     {"layers", c.layers},
                     {"heads", c.heads},
                     {"tasks", c.tasks},
                     {"node_features", c.node_features},
                     {"edge_features", c.edge_features}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c = ModelConfig{};
  if (j.contains("architecture")) c.architecture = architecture_from_name(j.at("architecture").get<std::string>());
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.graph_dim = j.value("graph_dim", c.graph_dim);
  c.layers = j.value("layers", c.layers);
  c.heads = j.value("heads", c.heads);
  c.tasks = j.value("tasks", c.tasks);
  c.node_features = j.value("node_features", c.node_features);
  c.edge_features = j.value("edge_features", c.edge_features);
}

}  // namespace molrel::gnn
