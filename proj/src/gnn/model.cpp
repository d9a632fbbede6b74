#include "molrel/gnn/model.hpp"

#include <string>

#include "molrel/core/artifact.hpp"
#include "molrel/core/digest.hpp"
#include "molrel/core/error.hpp"

namespace molrel::gnn {

using ad::Var;

namespace {

// Σ_{j∈N(i)} h_j over incoming directed edges, excluding i itself.
Var neighbor_sum(Var h, const GraphBatch& batch) {
  return ad::segment_sum(ad::gather_rows(h, batch.edge_src), batch.edge_dst, batch.node_count);
}

}  // namespace

EmbeddedInputs embed_inputs(ad::Tape& tape, const GraphBatch& batch, Var node_weight, const Var* edge_weight) {
  const ad::Tensor& wn = node_weight.value();
  if (wn.rank() != 2 || wn.cols() != batch.node_features.cols()) {
    throw ShapeError("embed_inputs: node projection " + ad::shape_string(wn.shape()) + " does not accept " +
                     std::to_string(batch.node_features.cols()) + " node features");
  }
  EmbeddedInputs out;
  out.nodes = ad::linear(tape.constant(batch.node_features), node_weight);
  if (edge_weight != nullptr) {
    const ad::Tensor& we = edge_weight->value();
    if (we.rank() != 2 || we.cols() != batch.edge_features.cols()) {
      throw ShapeError("embed_inputs: edge projection " + ad::shape_string(we.shape()) + " does not accept " +
                       std::to_string(batch.edge_features.cols()) + " edge features");
    }
    out.edges = ad::linear(tape.constant(batch.edge_features), *edge_weight);
  }
  return out;
}

Var layer_gcn(Var h, const GraphBatch& batch, Var w) {
  return ad::relu(ad::linear(ad::add(h, neighbor_sum(h, batch)), w));
}

Var layer_gin(Var h, const GraphBatch& batch, Var w1, Var w2) {
  return ad::linear(ad::relu(ad::linear(ad::add(h, neighbor_sum(h, batch)), w1)), w2);
}

Var layer_sage(Var h, const GraphBatch& batch, Var w) {
  const Var parts[] = {h, neighbor_sum(h, batch)};
  return ad::relu(ad::linear(ad::concat_cols(parts), w));
}

namespace {

struct HeadTerms {
  Var z;      // W^k h, (N, d/K)
  Var alpha;  // (E, 1)
};

HeadTerms gat_head(Var h, const GraphBatch& batch, const GatHead& head) {
  const Var z = ad::linear(h, head.w);
  const Var score_dst = ad::gather_rows(ad::linear(z, head.u_dst), batch.edge_dst);
  const Var score_src = ad::gather_rows(ad::linear(z, head.u_src), batch.edge_src);
  const Var scores = ad::leaky_relu(ad::add(score_dst, score_src));
  return {z, ad::segment_softmax(scores, batch.edge_dst, batch.node_count)};
}

}  // namespace

Var gat_attention(Var h, const GraphBatch& batch, const GatHead& head) { return gat_head(h, batch, head).alpha; }

Var layer_gat(Var h, const GraphBatch& batch, std::span<const GatHead> heads) {
  std::vector<Var> outputs;
  outputs.reserve(heads.size());
  for (const GatHead& head : heads) {
    const HeadTerms t = gat_head(h, batch, head);
    const Var messages = ad::scale_rows(ad::gather_rows(t.z, batch.edge_src), t.alpha);
    outputs.push_back(ad::elu(ad::segment_sum(messages, batch.edge_dst, batch.node_count)));
  }
  return outputs.size() == 1 ? outputs.front() : ad::concat_cols(outputs);
}

GatedGcnOutput layer_gatedgcn(Var h, Var edge_state, const GraphBatch& batch, const GatedGcnWeights& w) {
  const Var ah = ad::gather_rows(ad::linear(h, w.a), batch.edge_dst);
  const Var bh = ad::gather_rows(ad::linear(h, w.b), batch.edge_src);
  const Var cw = ad::linear(edge_state, w.c);
  const Var edges = ad::add(edge_state, ad::relu(ad::add(ad::add(ah, bh), cw)));
  const Var sig = ad::sigmoid(edges);
  const Var denom = ad::add_scalar(ad::segment_sum(sig, batch.edge_dst, batch.node_count), kGateEpsilon);
  const Var gates = ad::divide(sig, ad::gather_rows(denom, batch.edge_dst));
  const Var messages = ad::hadamard(gates, ad::gather_rows(ad::linear(h, w.w), batch.edge_src));
  const Var nodes = ad::relu(ad::add(ad::linear(h, w.u), ad::segment_sum(messages, batch.edge_dst, batch.node_count)));
  return {nodes, edges, gates};
}

Var residual_update(Var h, Var update, const ad::Tensor* keep_scale) {
  return ad::add(h, keep_scale != nullptr ? ad::dropout(update, *keep_scale) : update);
}

Var readout(Var h, const GraphBatch& batch, Var w_graph) {
  return ad::linear(ad::segment_sum(h, batch.node_graph, batch.graph_count), w_graph);
}

Var classify(Var h_graph, Var w, Var b) { return ad::add_row(ad::linear(h_graph, w), b); }

Var bce_loss_masked(Var logits, const GraphBatch& batch) { return ad::bce_with_logits(logits, batch.labels, batch.mask); }

GnnModel::GnnModel(ModelConfig config) : config_(config), layout_(config) {}

void GnnModel::check_params(std::span<const double> params) const {
  if (params.size() != layout_.total()) {
    throw ShapeError("model expects " + std::to_string(layout_.total()) + " parameters, got " + std::to_string(params.size()));
  }
}

ForwardResult GnnModel::forward(ad::Tape& tape, std::span<const double> params, const GraphBatch& batch,
                                const DropoutSpec& dropout) const {
  check_params(params);
  ForwardResult out;
  const auto& entries = layout_.entries();
  out.leaves.reserve(entries.size());
  for (const auto& e : entries) {
    const auto s = params.subspan(e.offset, e.size);
    out.leaves.push_back(tape.parameter(ad::Tensor(e.shape, std::vector<double>(s.begin(), s.end()))));
  }
  std::size_t next = 0;
  auto take = [&]() { return out.leaves[next++]; };

  const Var node_w = take();
  const bool gated = config_.architecture == Architecture::kGatedGcn;
  Var edge_w;
  if (gated) edge_w = take();
  const EmbeddedInputs in = embed_inputs(tape, batch, node_w, gated ? &edge_w : nullptr);
  Var h = in.nodes;
  Var edges = in.edges;

  for (std::size_t l = 0; l < config_.layers; ++l) {
    Var update;
    switch (config_.architecture) {
      case Architecture::kGcn: update = layer_gcn(h, batch, take()); break;
      case Architecture::kGin: {
        const Var w1 = take();
        update = layer_gin(h, batch, w1, take());
        break;
      }
      case Architecture::kSage: update = layer_sage(h, batch, take()); break;
      case Architecture::kGat: {
        std::vector<GatHead> heads;
        for (std::size_t k = 0; k < config_.heads; ++k) {
          GatHead head;
          head.w = take();
          head.u_dst = take();
          head.u_src = take();
          heads.push_back(head);
        }
        update = layer_gat(h, batch, heads);
        break;
      }
      case Architecture::kGatedGcn: {
        GatedGcnWeights w;
        w.u = take();
        w.w = take();
        w.a = take();
        w.b = take();
        w.c = take();
        const GatedGcnOutput o = layer_gatedgcn(h, edges, batch, w);
        update = o.nodes;
        edges = o.edges;
        break;
      }
    }
    if (dropout.active()) {
      const ad::Tensor keep = ad::dropout_mask(update.shape(), dropout.p, *dropout.rng);
      h = residual_update(h, update, &keep);
    } else {
      h = residual_update(h, update);
    }
  }
  out.node_states = h;
  const Var graph_w = take();
  const Var cls_w = take();
  const Var cls_b = take();
  out.logits = classify(readout(h, batch, graph_w), cls_w, cls_b);
  return out;
}

ad::Tensor GnnModel::predict_logits(std::span<const double> params, const GraphBatch& batch, const DropoutSpec& dropout) const {
  ad::Tape tape;
  return forward(tape, params, batch, dropout).logits.value();
}

double GnnModel::loss_and_gradient(std::span<const double> params, const GraphBatch& batch, std::vector<double>& grad,
                                   const DropoutSpec& dropout) const {
  ad::Tape tape;
  const ForwardResult f = forward(tape, params, batch, dropout);
  const Var loss = bce_loss_masked(f.logits, batch);
  const auto grads = tape.backward(loss);
  grad.assign(layout_.total(), 0.0);
  const auto& entries = layout_.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& g = grads.at(f.leaves[i].id);
    std::copy(g.data().begin(), g.data().end(), grad.begin() + static_cast<std::ptrdiff_t>(entries[i].offset));
  }
  return loss.value().item();
}

void save_weights(const std::filesystem::path& path, const ModelConfig& config, std::span<const double> params) {
  const ParamLayout layout(config);
  if (params.size() != layout.total()) throw ShapeError("save_weights: parameter count does not match the config");
  Artifact a;
  a.magic = "MRWGHT01";
  a.header = {{"kind", "weights"}, {"model", config}, {"layout_digest", to_hex(layout.digest())}};
  a.payload.assign(params.begin(), params.end());
  write_artifact(path, a);
}

std::vector<double> load_weights(const std::filesystem::path& path, ModelConfig* config) {
  Artifact a = read_artifact(path, "MRWGHT01");
  ModelConfig stored;
  try {
    stored = a.header.at("model").get<ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": bad model header: " + e.what());
  }
  const ParamLayout layout(stored);
  if (a.header.value("layout_digest", std::string{}) != to_hex(layout.digest()) || a.payload.size() != layout.total()) {
    throw DataError(path.string() + ": parameter layout digest mismatch");
  }
  if (config != nullptr) *config = stored;
  return std::move(a.payload);
}

}  // namespace molrel::gnn
