#include "molrel/autodiff/tape.hpp"

#include "molrel/core/error.hpp"

namespace molrel::ad {

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, false, {}});
  return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, true, false, {}});
  params_.push_back(nodes_.size() - 1);
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, bool requires_grad, Backward backward) {
  nodes_.push_back(Node{std::move(value), {}, requires_grad, false, requires_grad ? std::move(backward) : Backward{}});
  return Var{this, nodes_.size() - 1};
}

Tensor Tape::gradient(Var v) const {
  const Node& n = nodes_[v.id];
  return n.has_grad ? n.grad : Tensor::zeros_like(n.value);
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor::zeros_like(n.value);
    n.has_grad = true;
  }
  return n.grad;
}

std::map<std::size_t, Tensor> Tape::backward(Var loss) {
  if (loss.tape != this) throw Error("backward: loss was not recorded on this tape");
  if (nodes_[loss.id].value.size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " + shape_string(nodes_[loss.id].value.shape()));
  }
  grad_buffer(loss.id)[0] += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.has_grad || !n.backward) continue;
    n.backward(*this, i);
  }
  std::map<std::size_t, Tensor> grads;
  for (std::size_t id : params_) grads.emplace(id, gradient(Var{this, id}));
  return grads;
}

void Tape::zero_grad() {
  for (Node& n : nodes_) {
    n.grad = Tensor{};
    n.has_grad = false;
  }
}

}  // namespace molrel::ad
