#pragma once

#include <cstddef>
#include <functional>
#include <deque>
#include <map>
#include <vector>

#include "molrel/autodiff/tensor.hpp"

namespace molrel::ad {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// tape that produced it is alive.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Reverse-mode differentiation record. Nodes are appended in evaluation
/// order, so the node list is always topologically sorted.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Untracked input; receives no gradient.
  Var constant(Tensor value);
  /// Tracked leaf. Every parameter gets a gradient after backward().
  Var parameter(Tensor value);

  /// Appends an op result. `backward` reads grad(self) and accumulates into
  /// the inputs; it is only invoked when some input requires a gradient.
  Var record(Tensor value, bool requires_grad, Backward backward);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  /// Gradient accumulated at a node (zeros if none reached it).
  Tensor gradient(Var v) const;
  /// Mutable gradient buffer, allocated on first use. For op implementations.
  Tensor& grad_buffer(std::size_t id);
  bool has_grad(std::size_t id) const { return nodes_[id].has_grad; }

  /// Back-propagates from a scalar loss. Returns the gradient of every
  /// parameter leaf keyed by node id; unreachable parameters map to zeros.
  std::map<std::size_t, Tensor> backward(Var loss);

  void zero_grad();

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<std::size_t>& parameter_ids() const noexcept { return params_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backward backward;
  };

  std::deque<Node> nodes_;  // references returned by value() stay valid across appends
  std::vector<std::size_t> params_;
};

}  // namespace molrel::ad
