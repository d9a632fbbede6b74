#include "molrel/bayes/gnn_objective.hpp"

#include <algorithm>

#include "molrel/core/digest.hpp"
#include "molrel/core/error.hpp"

namespace molrel::bayes {

GraphSet make_graph_set(const chem::LabeledDataset& dataset, std::span<const std::size_t> indices) {
  GraphSet set;
  set.tasks = dataset.task_count();
  set.graphs.reserve(indices.size());
  set.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= dataset.size()) throw DataError("graph set index " + std::to_string(i) + " is outside the dataset");
    set.graphs.push_back(chem::featurize(dataset.records[i].graph));
    set.labels.push_back(dataset.records[i].labels);
  }
  return set;
}

GnnObjective::GnnObjective(const gnn::GnnModel& model, const GraphSet& train) : model_(model), train_(train) {
  if (train.tasks != model.config().tasks) throw ConfigError("model task count does not match the training set");
}

double GnnObjective::loss_and_gradient(std::span<const double> w, std::span<const std::size_t> examples,
                                       std::vector<double>& grad, const gnn::DropoutSpec& dropout) const {
  std::vector<const chem::FeaturizedGraph*> graphs;
  std::vector<const std::vector<std::int8_t>*> labels;
  graphs.reserve(examples.size());
  labels.reserve(examples.size());
  for (std::size_t i : examples) {
    graphs.push_back(&train_.graphs.at(i));
    labels.push_back(&train_.labels.at(i));
  }
  const gnn::GraphBatch batch = gnn::make_batch(graphs, labels, train_.tasks);
  return model_.loss_and_gradient(w, batch, grad, dropout);
}

std::string GnnObjective::layout_digest() const { return to_hex(model_.layout().digest()); }

GnnPredictor::GnnPredictor(const gnn::GnnModel& model, const GraphSet& inputs, std::size_t chunk) : model_(model) {
  if (chunk == 0) throw ConfigError("predictor chunk must be >= 1");
  rows_ = inputs.size();
  for (std::size_t start = 0; start < rows_; start += chunk) {
    std::vector<const chem::FeaturizedGraph*> graphs;
    for (std::size_t i = start; i < std::min(rows_, start + chunk); ++i) graphs.push_back(&inputs.graphs[i]);
    batches_.push_back(gnn::make_batch(graphs, {}, model.config().tasks));
  }
}

std::vector<double> GnnPredictor::logits(std::span<const double> w, const gnn::DropoutSpec& dropout) const {
  std::vector<double> out;
  out.reserve(rows_ * tasks());
  for (const gnn::GraphBatch& batch : batches_) {
    const ad::Tensor t = model_.predict_logits(w, batch, dropout);
    out.insert(out.end(), t.data().begin(), t.data().end());
  }
  return out;
}

}  // namespace molrel::bayes
