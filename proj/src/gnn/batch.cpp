#include "molrel/gnn/batch.hpp"

#include <algorithm>

#include "molrel/chem/dataset.hpp"
#include "molrel/core/error.hpp"

namespace molrel::gnn {

GraphBatch make_batch(const std::vector<const chem::FeaturizedGraph*>& graphs,
                      const std::vector<const std::vector<std::int8_t>*>& labels, std::size_t tasks) {
  if (!labels.empty() && labels.size() != graphs.size()) throw ShapeError("make_batch: one label row per graph required");
  GraphBatch b;
  b.graph_count = graphs.size();
  std::size_t edges = 0;
  for (const auto* g : graphs) {
    b.node_count += g->atom_count;
    edges += g->edge_count();
  }
  b.node_features = ad::Tensor({b.node_count, chem::kNodeFeatureDim});
  b.edge_features = ad::Tensor({edges, chem::kEdgeFeatureDim});
  b.edge_src.reserve(edges);
  b.edge_dst.reserve(edges);
  b.node_graph.reserve(b.node_count);
  std::size_t node_offset = 0;
  std::size_t edge_offset = 0;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto& g = *graphs[gi];
    std::copy(g.node_features.begin(), g.node_features.end(),
              b.node_features.data().begin() + static_cast<std::ptrdiff_t>(node_offset * chem::kNodeFeatureDim));
    std::copy(g.edge_features.begin(), g.edge_features.end(),
              b.edge_features.data().begin() + static_cast<std::ptrdiff_t>(edge_offset * chem::kEdgeFeatureDim));
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      b.edge_src.push_back(node_offset + g.edge_source[e]);
      b.edge_dst.push_back(node_offset + g.edge_target[e]);
    }
    b.node_graph.insert(b.node_graph.end(), g.atom_count, gi);
    node_offset += g.atom_count;
    edge_offset += g.edge_count();
  }
  b.labels = ad::Tensor({b.graph_count, tasks});
  b.mask = ad::Tensor({b.graph_count, tasks});
  for (std::size_t gi = 0; gi < labels.size(); ++gi) {
    const auto& row = *labels[gi];
    if (row.size() != tasks) throw ShapeError("make_batch: label row has " + std::to_string(row.size()) + " tasks, expected " + std::to_string(tasks));
    for (std::size_t t = 0; t < tasks; ++t) {
      if (row[t] == chem::kMissingLabel) continue;
      b.labels.at(gi, t) = row[t];
      b.mask.at(gi, t) = 1.0;
    }
  }
  return b;
}

}  // namespace molrel::gnn
