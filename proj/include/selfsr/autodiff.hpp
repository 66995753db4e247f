// Copyright 2026 The SelFSR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SELFSR_AUTODIFF_HPP_
#define SELFSR_AUTODIFF_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "selfsr/tensor.hpp"

namespace selfsr {

template <typename T>
class Variable;

/// Maps an upstream gradient to one gradient per input. Entries for inputs
/// that do not require a gradient may be left undefined.
template <typename T>
using BackwardFn = std::function<std::vector<Variable<T>>(const Variable<T>&)>;

/// One tape entry. Ids increase strictly in construction order (per thread),
/// which is the order backward traversal reverses.
template <typename T>
struct Node {
  Tensor<T> value;
  const char* op = "leaf";
  std::vector<Variable<T>> inputs;
  BackwardFn<T> backward;
  bool second_order = false;
  bool requires_grad = false;
  std::uint64_t id = 0;
};

template <typename T>
class Variable {
 public:
  Variable() = default;
  explicit Variable(Tensor<T> value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor<T>& value() const { return node_->value; }
  /// Leaves only; used by optimizers to update parameters in place.
  Tensor<T>& mutable_value();
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool is_leaf() const { return node_->inputs.empty(); }
  std::uint64_t id() const { return node_->id; }
  const char* op() const { return node_->op; }
  T item() const { return node_->value.item(); }
  Node<T>* node() const { return node_.get(); }

  static Variable from_node(std::shared_ptr<Node<T>> node) {
    Variable v;
    v.node_ = std::move(node);
    return v;
  }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Thread-local switch controlling whether ops record tape nodes.
bool grad_mode_enabled();

class GradModeGuard {
 public:
  explicit GradModeGuard(bool enabled);
  ~GradModeGuard();
  GradModeGuard(const GradModeGuard&) = delete;
  GradModeGuard& operator=(const GradModeGuard&) = delete;

 private:
  bool previous_;
};

class NoGradGuard : public GradModeGuard {
 public:
  NoGradGuard() : GradModeGuard(false) {}
};

/// Creates the output of an op. Throws NumericalError naming `op` when the
/// value is not finite. Records a tape node only when grad mode is on and an
/// input requires a gradient.
template <typename T>
Variable<T> record(const char* op, Tensor<T> value, std::vector<Variable<T>> inputs,
                   BackwardFn<T> backward, bool second_order);

/// Nodes reachable from `root` that require a gradient, in traversal order
/// (strictly decreasing construction id).
template <typename T>
std::vector<Node<T>*> tape_order(const Variable<T>& root);

/// Gradients of a scalar `loss` with respect to `wrt`. Unreachable inputs get
/// zeros. With `create_graph` the returned gradients are themselves recorded
/// so they can be differentiated again; only ops flagged second-order capable
/// may appear on the path.
template <typename T>
std::vector<Variable<T>> grad(const Variable<T>& loss, const std::vector<Variable<T>>& wrt,
                              bool create_graph = false);

// ---------------------------------------------------------------------------
// Generic ops. Binary ops broadcast size-1 extents on any axis.

enum Axis : unsigned { kAxisN = 1u, kAxisC = 2u, kAxisH = 4u, kAxisW = 8u };
inline constexpr unsigned kAxesHW = kAxisH | kAxisW;
inline constexpr unsigned kAxesCHW = kAxisC | kAxisH | kAxisW;
inline constexpr unsigned kAllAxes = kAxisN | kAxisC | kAxisH | kAxisW;

Shape broadcast_shape(const Shape& a, const Shape& b);

template <typename T> Variable<T> constant(Tensor<T> value);
template <typename T> Variable<T> detach(const Variable<T>& a);

template <typename T> Variable<T> add(const Variable<T>& a, const Variable<T>& b);
template <typename T> Variable<T> sub(const Variable<T>& a, const Variable<T>& b);
template <typename T> Variable<T> mul(const Variable<T>& a, const Variable<T>& b);
template <typename T> Variable<T> div(const Variable<T>& a, const Variable<T>& b);
template <typename T> Variable<T> square(const Variable<T>& a);
template <typename T> Variable<T> scale(const Variable<T>& a, double s);
template <typename T> Variable<T> add_scalar(const Variable<T>& a, double s);

template <typename T> Variable<T> sqrt(const Variable<T>& a);
template <typename T> Variable<T> tanh(const Variable<T>& a);
template <typename T> Variable<T> sigmoid(const Variable<T>& a);
/// log(max(a, floor)); zero gradient where the floor is active.
template <typename T> Variable<T> log_clamped(const Variable<T>& a, double floor = 1e-8);
template <typename T> Variable<T> abs(const Variable<T>& a);
template <typename T> Variable<T> relu(const Variable<T>& a);
/// max(x, slope * x). The second derivative is taken as zero everywhere.
template <typename T> Variable<T> leaky_relu(const Variable<T>& a, double slope = 0.2);

/// Sum over the axes in `axes`, keeping them as size-1 extents.
template <typename T> Variable<T> reduce_sum(const Variable<T>& a, unsigned axes);
template <typename T> Variable<T> reduce_mean(const Variable<T>& a, unsigned axes);
template <typename T> Variable<T> expand(const Variable<T>& a, const Shape& shape);
/// Sums `a` down to `shape` (the adjoint of expand).
template <typename T> Variable<T> sum_to(const Variable<T>& a, const Shape& shape);

}  // namespace selfsr

#endif  // SELFSR_AUTODIFF_HPP_
