#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "vega/numerics/tensor.hpp"

namespace vega::numerics {

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode autodiff tape. Nodes are appended in evaluation order, so
/// replaying them backwards is a valid reverse topological order.
///
/// A tape built with `record = false` evaluates values only; no backward
/// closures are stored and backward() is unavailable.
template <typename Scalar>
class Tape {
 public:
  using T = Tensor<Scalar>;
  using BackwardFn = std::function<void(Tape&, const T& out_grad)>;

  explicit Tape(bool record = true) : record_(record) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  bool recording() const { return record_; }

  Var constant(T value) { return push(std::move(value), false, {}); }

  /// Leaf bound to an external parameter; gradients accumulate into p.grad.
  Var parameter(Parameter<Scalar>& p) {
    Node node;
    node.external_value = &p.value;
    node.requires_grad = record_;
    if (record_) {
      if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) p.zero_grad();
      node.external_grad = &p.grad;
    }
    nodes_.push_back(std::move(node));
    return Var{nodes_.size() - 1};
  }

  /// Leaf that owns its value and collects a gradient.
  Var variable(T value) { return push(std::move(value), record_, {}); }

  const T& value(Var v) const {
    const Node& n = nodes_.at(v.id);
    return n.external_value ? *n.external_value : n.value;
  }

  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  /// Gradient of v after backward(); zero-sized if v never received one.
  const T& grad(Var v) const {
    const Node& n = nodes_.at(v.id);
    return n.external_grad ? *n.external_grad : n.grad;
  }

  std::size_t size() const { return nodes_.size(); }

  /// Records a computed node. `fn` receives the node's gradient during backward.
  Var push(T value, bool requires_grad, BackwardFn fn) {
    Node node;
    node.value = std::move(value);
    node.requires_grad = record_ && requires_grad;
    if (node.requires_grad) node.backward = std::move(fn);
    nodes_.push_back(std::move(node));
    return Var{nodes_.size() - 1};
  }

  /// Adds `delta` into the gradient of v (no-op when v needs no gradient).
  template <typename Derived>
  void accumulate(Var v, const Eigen::MatrixBase<Derived>& delta) {
    Node& n = nodes_[v.id];
    if (!n.requires_grad) return;
    T& g = n.external_grad ? *n.external_grad : n.grad;
    if (g.size() == 0) {
      g = delta;
    } else {
      g += delta;
    }
  }

  /// Mutable gradient buffer of v, zero-initialised on first access.
  T& grad_buffer(Var v) {
    Node& n = nodes_[v.id];
    T& g = n.external_grad ? *n.external_grad : n.grad;
    if (g.size() == 0) {
      const T& val = value(v);
      g.setZero(val.rows(), val.cols());
    }
    return g;
  }

  void backward(Var loss) {
    if (!record_) throw InvalidState("backward on a non-recording tape");
    const T& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) {
      throw InvalidArgument("backward: loss must be scalar, got " + shape_string(shape_of(lv)));
    }
    if (!nodes_[loss.id].requires_grad) return;
    accumulate(loss, T::Ones(1, 1));
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.backward || n.grad.size() == 0) continue;
      // The closure may append to other nodes' grads but never to this one.
      n.backward(*this, n.grad);
    }
  }

 private:
  struct Node {
    T value;
    const T* external_value = nullptr;
    T grad;
    T* external_grad = nullptr;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  bool record_;
};

}  // namespace vega::numerics
