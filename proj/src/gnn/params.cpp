#include "molrel/gnn/params.hpp"

#include <cmath>

#include "molrel/core/digest.hpp"
#include "molrel/core/error.hpp"

namespace molrel::gnn {

ParamLayout::ParamLayout(const ModelConfig& config) {
  config.validate();
  const std::size_t d = config.hidden_dim;
  add("embed.node", {d, config.node_features});
  if (config.architecture == Architecture::kGatedGcn) add("embed.edge", {d, config.edge_features});
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    switch (config.architecture) {
      case Architecture::kGcn: add(p + "w", {d, d}); break;
      case Architecture::kGin:
        add(p + "w1", {d, d});
        add(p + "w2", {d, d});
        break;
      case Architecture::kSage: add(p + "w", {d, 2 * d}); break;
      case Architecture::kGat: {
        const std::size_t dk = d / config.heads;
        for (std::size_t k = 0; k < config.heads; ++k) {
          const std::string h = p + "head" + std::to_string(k) + ".";
          add(h + "w", {dk, d});
          add(h + "u_dst", {1, dk}, false, 2 * dk, 1);
          add(h + "u_src", {1, dk}, false, 2 * dk, 1);
        }
        break;
      }
      case Architecture::kGatedGcn:
        for (const char* n : {"u", "w", "a", "b", "c"}) add(p + n, {d, d});
        break;
    }
  }
  add("readout.w", {config.graph_dim, d});
  add("classifier.w", {config.tasks, config.graph_dim});
  add("classifier.b", {config.tasks}, true);
}

void ParamLayout::add(std::string name, ad::Shape shape, bool bias, std::size_t fan_in, std::size_t fan_out) {
  ParamEntry e;
  e.size = ad::shape_size(shape);
  e.offset = total_;
  e.bias = bias;
  if (!bias && fan_in == 0) {
    fan_out = shape[0];
    fan_in = shape[1];
  }
  e.fan_in = fan_in;
  e.fan_out = fan_out;
  e.name = std::move(name);
  e.shape = std::move(shape);
  total_ += e.size;
  entries_.push_back(std::move(e));
}

std::size_t ParamLayout::index(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return i;
  throw Error("no parameter named '" + std::string(name) + "'");
}

std::uint64_t ParamLayout::digest() const {
  std::string text;
  for (const auto& e : entries_) text += e.name + ad::shape_string(e.shape) + ";";
  return fnv1a64(text);
}

std::span<double> ParamLayout::slice(std::span<double> flat, std::string_view name) const {
  const ParamEntry& e = entry(name);
  return flat.subspan(e.offset, e.size);
}

std::span<const double> ParamLayout::slice(std::span<const double> flat, std::string_view name) const {
  const ParamEntry& e = entry(name);
  return flat.subspan(e.offset, e.size);
}

std::vector<double> init_params(const ParamLayout& layout, Rng& rng) {
  std::vector<double> flat(layout.total(), 0.0);
  for (const auto& e : layout.entries()) {
    if (e.bias) continue;
    const double limit = std::sqrt(6.0 / static_cast<double>(e.fan_in + e.fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < e.size; ++i) flat[e.offset + i] = dist(rng);
  }
  return flat;
}

}  // namespace molrel::gnn
