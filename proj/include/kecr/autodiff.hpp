// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kecr/params.hpp"
#include "kecr/tensor.hpp"

/// Reverse-mode differentiation over a recorded tape.
///
/// Every operation appends a node holding its value and a closure that
/// pushes the node's gradient into its inputs. Nodes that do not depend on
/// any trainable leaf carry no closure, so a tape built from constants is a
/// plain forward evaluation.
namespace kecr::ad {

class Tape;

class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  double item() const { return value().item(); }
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  bool valid() const noexcept { return tape_ != nullptr; }
  std::size_t id() const noexcept { return id_; }
  Tape& tape() const { return *tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);

  /// Leaf bound to a store entry. The value is referenced, not copied, so the
  /// store must outlive the tape and stay unmodified while it is in use.
  /// Gradients reach the store only when `requires_grad` is set and the entry
  /// is trainable. Repeated calls for the same entry return the same leaf.
  Var param(ParameterStore& store, const std::string& name, bool requires_grad = true);

  /// Appends an operation node. `backward` is dropped when `requires_grad` is false.
  Var record(Tensor value, bool requires_grad, Backward backward);

  const Tensor& value(std::size_t id) const { return *nodes_[id].ref; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Adds `g` (same size as the node value) into the node's gradient.
  void accumulate(std::size_t id, std::span<const double> g);
  /// Gradient buffer of a node, allocated on first use.
  Tensor& grad(std::size_t id);

  /// Propagates d(root)/d(node) for a scalar root and adds parameter
  /// gradients into their store entries.
  void backward(Var root);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* ref = nullptr;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
    Parameter* param = nullptr;
  };

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

// Operations. Inputs must live on the same tape.

Var matvec(Var W, Var x);
Var linear(Var W, Var x, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var one_minus(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var softmax(Var a);
/// Elementwise log(max(a, floor)); the gradient is zero where the floor is active.
Var log(Var a, double floor = 0.0);

Var concat(std::span<const Var> parts);
inline Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }
/// Sum of same-shaped inputs.
Var add_n(std::span<const Var> parts);

Var dot(Var a, Var b);
Var sum(Var a);
Var row(Var table, std::size_t i);
Var element(Var v, std::size_t i);
/// sum_i weights[i] * vectors[i]
Var weighted_sum(std::span<const Var> vectors, Var weights);
/// x^T W y
Var bilinear(Var x, Var W, Var y);

struct GruVars {
  Var W_z, U_z, b_z;
  Var W_r, U_r, b_r;
  Var W_h, U_h, b_h;
};

Var gru_cell(const GruVars& w, Var h_prev, Var x);

}  // namespace kecr::ad
