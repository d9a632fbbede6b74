#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "molrel/autodiff/tensor.hpp"
#include "molrel/chem/featurize.hpp"

namespace molrel::gnn {

/// Disjoint union of featurized graphs. Nodes of graph g occupy a contiguous
/// run, so node_graph is sorted. Messages flow along each directed edge from
/// edge_src to edge_dst.
struct GraphBatch {
  std::size_t graph_count = 0;
  std::size_t node_count = 0;
  ad::Tensor node_features;  // node_count x d_x
  ad::Tensor edge_features;  // edge_count x d_e
  std::vector<std::size_t> edge_src;
  std::vector<std::size_t> edge_dst;
  std::vector<std::size_t> node_graph;
  ad::Tensor labels;  // graph_count x T; 0 where missing
  ad::Tensor mask;    // graph_count x T; 1 where labelled

  std::size_t edge_count() const noexcept { return edge_src.size(); }
};

/// `labels` may be empty (prediction only); otherwise one row of `tasks`
/// entries per graph, each 0, 1 or chem::kMissingLabel.
GraphBatch make_batch(const std::vector<const chem::FeaturizedGraph*>& graphs,
                      const std::vector<const std::vector<std::int8_t>*>& labels, std::size_t tasks);

}  // namespace molrel::gnn
