#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "molrel/autodiff/ops.hpp"
#include "molrel/autodiff/tape.hpp"
#include "molrel/core/random.hpp"
#include "molrel/gnn/batch.hpp"
#include "molrel/gnn/config.hpp"
#include "molrel/gnn/params.hpp"

namespace molrel::gnn {

// Layer building blocks on the tape. Node states are (N, d); edge states (E, d).

struct EmbeddedInputs {
  ad::Var nodes;
  ad::Var edges;  // gatedgcn only; otherwise unset
};

EmbeddedInputs embed_inputs(ad::Tape& tape, const GraphBatch& batch, ad::Var node_weight, const ad::Var* edge_weight);

/// relu(W · (h_i + Σ_{j∈N(i)} h_j))
ad::Var layer_gcn(ad::Var h, const GraphBatch& batch, ad::Var w);
/// W2 · relu(W1 · (h_i + Σ_{j∈N(i)} h_j))
ad::Var layer_gin(ad::Var h, const GraphBatch& batch, ad::Var w1, ad::Var w2);
/// relu(W · [h_i ; Σ_{j∈N(i)} h_j]) with W of shape (d, 2d)
ad::Var layer_sage(ad::Var h, const GraphBatch& batch, ad::Var w);

struct GatHead {
  ad::Var w;      // (d/K, d)
  ad::Var u_dst;  // (1, d/K), scores the receiving node
  ad::Var u_src;  // (1, d/K), scores the neighbor
};
/// Concat_k elu(Σ_j α_ij^k W^k h_j), α^k = softmax over incoming edges of
/// leaky_relu(u_dst·W^k h_i + u_src·W^k h_j). Nodes without neighbors get 0 before elu.
ad::Var layer_gat(ad::Var h, const GraphBatch& batch, std::span<const GatHead> heads);
/// Attention coefficients of one head, one per directed edge.
ad::Var gat_attention(ad::Var h, const GraphBatch& batch, const GatHead& head);

struct GatedGcnWeights {
  ad::Var u, w, a, b, c;  // (d, d) each
};
struct GatedGcnOutput {
  ad::Var nodes;  // ĥ
  ad::Var edges;  // updated edge states
  ad::Var gates;  // (E, d)
};
inline constexpr double kGateEpsilon = 1e-6;
/// ŵ' = ŵ + relu(A h_i + B h_j + C ŵ); gate_ij = σ(ŵ'_ij) / (Σ_j' σ(ŵ'_ij') + ε);
/// ĥ_i = relu(U h_i + Σ_j gate_ij ⊙ W h_j).
GatedGcnOutput layer_gatedgcn(ad::Var h, ad::Var edge_state, const GraphBatch& batch, const GatedGcnWeights& w);

/// h + ĥ, with ĥ multiplied by `keep_scale` when given.
ad::Var residual_update(ad::Var h, ad::Var update, const ad::Tensor* keep_scale = nullptr);
/// W_G · Σ_{v∈G} h_v per graph, (G, d_G).
ad::Var readout(ad::Var h, const GraphBatch& batch, ad::Var w_graph);
/// W · h_G + b, (G, T).
ad::Var classify(ad::Var h_graph, ad::Var w, ad::Var b);
/// Mean BCE over labelled cells; throws DataError when none are labelled.
ad::Var bce_loss_masked(ad::Var logits, const GraphBatch& batch);

/// Residual-branch dropout. Active when `rng` is set and p > 0.
struct DropoutSpec {
  double p = 0.0;
  Rng* rng = nullptr;

  bool active() const noexcept { return rng != nullptr && p > 0.0; }
};

struct ForwardResult {
  std::vector<ad::Var> leaves;  // one parameter leaf per layout entry
  ad::Var node_states;          // h^L
  ad::Var logits;
};

class GnnModel {
 public:
  explicit GnnModel(ModelConfig config);

  const ModelConfig& config() const noexcept { return config_; }
  const ParamLayout& layout() const noexcept { return layout_; }
  std::size_t param_count() const noexcept { return layout_.total(); }

  std::vector<double> init(Rng& rng) const { return init_params(layout_, rng); }

  ForwardResult forward(ad::Tape& tape, std::span<const double> params, const GraphBatch& batch,
                        const DropoutSpec& dropout = {}) const;

  /// Logits as a (G, T) tensor.
  ad::Tensor predict_logits(std::span<const double> params, const GraphBatch& batch, const DropoutSpec& dropout = {}) const;

  /// Masked BCE loss; writes d loss / d params into `grad` (resized to param_count()).
  double loss_and_gradient(std::span<const double> params, const GraphBatch& batch, std::vector<double>& grad,
                           const DropoutSpec& dropout = {}) const;

 private:
  void check_params(std::span<const double> params) const;

  ModelConfig config_;
  ParamLayout layout_;
};

/// Weight snapshot: architecture config, layout digest and flat parameters.
void save_weights(const std::filesystem::path& path, const ModelConfig& config, std::span<const double> params);
/// Throws DataError when the stored digest disagrees with the layout rebuilt from the stored config.
std::vector<double> load_weights(const std::filesystem::path& path, ModelConfig* config = nullptr);

}  // namespace molrel::gnn
