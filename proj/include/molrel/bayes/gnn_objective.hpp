#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "molrel/bayes/objective.hpp"
#include "molrel/chem/dataset.hpp"
#include "molrel/chem/featurize.hpp"
#include "molrel/gnn/batch.hpp"
#include "molrel/gnn/model.hpp"

namespace molrel::bayes {

/// Featurized graphs and labels of a subset of a dataset.
struct GraphSet {
  std::vector<chem::FeaturizedGraph> graphs;
  std::vector<std::vector<std::int8_t>> labels;
  std::size_t tasks = 0;

  std::size_t size() const noexcept { return graphs.size(); }
};

GraphSet make_graph_set(const chem::LabeledDataset& dataset, std::span<const std::size_t> indices);

/// Mask-aware mean BCE of a GNN over a training GraphSet. Holds references;
/// the model and set must outlive it.
class GnnObjective final : public Objective {
 public:
  GnnObjective(const gnn::GnnModel& model, const GraphSet& train);

  std::size_t param_count() const override { return model_.param_count(); }
  std::size_t example_count() const override { return train_.size(); }
  std::vector<double> initial_params(Rng& rng) const override { return model_.init(rng); }
  double loss_and_gradient(std::span<const double> w, std::span<const std::size_t> examples, std::vector<double>& grad,
                           const gnn::DropoutSpec& dropout) const override;
  std::string layout_digest() const override;

 private:
  const gnn::GnnModel& model_;
  const GraphSet& train_;
};

/// Evaluates a GNN over a GraphSet in fixed chunks of graphs.
class GnnPredictor final : public Predictor {
 public:
  GnnPredictor(const gnn::GnnModel& model, const GraphSet& inputs, std::size_t chunk = 256);

  std::size_t rows() const override { return rows_; }
  std::size_t tasks() const override { return model_.config().tasks; }
  std::vector<double> logits(std::span<const double> w, const gnn::DropoutSpec& dropout) const override;

 private:
  const gnn::GnnModel& model_;
  std::vector<gnn::GraphBatch> batches_;
  std::size_t rows_ = 0;
};

}  // namespace molrel::bayes
