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

#include "selfsr/autodiff.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace selfsr {
namespace {

thread_local bool t_grad_mode = true;
thread_local std::uint64_t t_next_node_id = 1;

std::uint64_t next_node_id() { return t_next_node_id++; }

using Index4 = std::array<std::int64_t, 4>;

// Row-major strides of `in` viewed inside `out`, zero on broadcast axes.
Index4 broadcast_strides(const Shape& in, const Shape& out) {
  Index4 s{};
  std::int64_t stride = 1;
  for (int ax = 3; ax >= 0; --ax) {
    s[ax] = (in[ax] == 1 && out[ax] != 1) ? 0 : stride;
    stride *= in[ax];
  }
  return s;
}

template <typename T, typename F>
Tensor<T> binary_map(const Tensor<T>& a, const Tensor<T>& b, F f) {
  const Shape out_shape = broadcast_shape(a.shape(), b.shape());
  Tensor<T> out(out_shape);
  T* o = out.ptr();
  const T* pa = a.ptr();
  const T* pb = b.ptr();
  if (a.shape() == b.shape()) {
    for (std::int64_t i = 0; i < out.numel(); ++i) o[i] = f(pa[i], pb[i]);
    return out;
  }
  const Index4 sa = broadcast_strides(a.shape(), out_shape);
  const Index4 sb = broadcast_strides(b.shape(), out_shape);
  std::int64_t i = 0;
  for (std::int64_t n = 0; n < out_shape.n(); ++n)
    for (std::int64_t c = 0; c < out_shape.c(); ++c)
      for (std::int64_t h = 0; h < out_shape.h(); ++h)
        for (std::int64_t w = 0; w < out_shape.w(); ++w, ++i) {
          o[i] = f(pa[n * sa[0] + c * sa[1] + h * sa[2] + w * sa[3]],
                   pb[n * sb[0] + c * sb[1] + h * sb[2] + w * sb[3]]);
        }
  return out;
}

template <typename T, typename F>
Tensor<T> unary_map(const Tensor<T>& a, F f) {
  Tensor<T> out(a.shape());
  const T* pa = a.ptr();
  T* o = out.ptr();
  for (std::int64_t i = 0; i < a.numel(); ++i) o[i] = f(pa[i]);
  return out;
}

Shape reduced_shape(const Shape& s, unsigned axes) {
  Shape r = s;
  for (int ax = 0; ax < 4; ++ax) {
    if (axes & (1u << ax)) r.dims[ax] = 1;
  }
  return r;
}

template <typename T>
Tensor<T> sum_raw(const Tensor<T>& a, unsigned axes) {
  const Shape out_shape = reduced_shape(a.shape(), axes);
  std::vector<double> acc(static_cast<std::size_t>(out_shape.numel()), 0.0);
  const Index4 so = broadcast_strides(out_shape, a.shape());
  const Shape& s = a.shape();
  const T* pa = a.ptr();
  std::int64_t i = 0;
  for (std::int64_t n = 0; n < s.n(); ++n)
    for (std::int64_t c = 0; c < s.c(); ++c)
      for (std::int64_t h = 0; h < s.h(); ++h)
        for (std::int64_t w = 0; w < s.w(); ++w, ++i) {
          acc[static_cast<std::size_t>(n * so[0] + c * so[1] + h * so[2] + w * so[3])] += pa[i];
        }
  Tensor<T> out(out_shape);
  for (std::int64_t j = 0; j < out.numel(); ++j) out[j] = static_cast<T>(acc[static_cast<std::size_t>(j)]);
  return out;
}

template <typename T>
Tensor<T> expand_raw(const Tensor<T>& a, const Shape& shape) {
  Tensor<T> zeros(shape);
  return binary_map(zeros, a, [](T, T y) { return y; });
}

unsigned broadcast_axes(const Shape& from, const Shape& to) {
  unsigned axes = 0;
  for (int ax = 0; ax < 4; ++ax) {
    if (from[ax] == to[ax]) continue;
    if (to[ax] != 1) {
      throw ShapeError("cannot sum " + from.str() + " down to " + to.str());
    }
    axes |= 1u << ax;
  }
  return axes;
}

// Elementwise op whose derivative is a function of (x, y); the derivative is
// applied as a constant multiplier, so the op is second-order capable only
// when that derivative is piecewise constant.
template <typename T, typename F, typename D>
Variable<T> pointwise(const char* name, const Variable<T>& a, F f, D df, bool second_order) {
  Tensor<T> y = unary_map(a.value(), f);
  Tensor<T> yv = y;
  return record<T>(
      name, std::move(y), {a},
      [a, yv = std::move(yv), df](const Variable<T>& g) -> std::vector<Variable<T>> {
        const Tensor<T>& x = a.value();
        Tensor<T> d(x.shape());
        for (std::int64_t i = 0; i < x.numel(); ++i) d[i] = df(x[i], yv[i]);
        return {mul(g, constant(std::move(d)))};
      },
      second_order);
}

}  // namespace

bool grad_mode_enabled() { return t_grad_mode; }

GradModeGuard::GradModeGuard(bool enabled) : previous_(t_grad_mode) { t_grad_mode = enabled; }
GradModeGuard::~GradModeGuard() { t_grad_mode = previous_; }

Shape broadcast_shape(const Shape& a, const Shape& b) {
  Shape out;
  for (int ax = 0; ax < 4; ++ax) {
    if (a[ax] == b[ax] || b[ax] == 1) {
      out.dims[ax] = a[ax];
    } else if (a[ax] == 1) {
      out.dims[ax] = b[ax];
    } else {
      throw ShapeError("shapes " + a.str() + " and " + b.str() + " are not broadcastable");
    }
  }
  return out;
}

template <typename T>
Variable<T>::Variable(Tensor<T> value, bool requires_grad) : node_(std::make_shared<Node<T>>()) {
  if (!value.all_finite()) throw NumericalError("non-finite value in leaf tensor");
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
  node_->id = next_node_id();
}

template <typename T>
Tensor<T>& Variable<T>::mutable_value() {
  if (!node_->inputs.empty()) throw Error("mutable_value() on a non-leaf variable");
  return node_->value;
}

template <typename T>
Variable<T> record(const char* op, Tensor<T> value, std::vector<Variable<T>> inputs,
                   BackwardFn<T> backward, bool second_order) {
  if (!value.all_finite()) {
    throw NumericalError(std::string("non-finite value produced by '") + op + "'");
  }
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->op = op;
  node->id = next_node_id();
  const bool needs = t_grad_mode && std::any_of(inputs.begin(), inputs.end(),
                                                [](const Variable<T>& v) { return v.requires_grad(); });
  if (needs) {
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
    node->second_order = second_order;
    node->requires_grad = true;
  }
  return Variable<T>::from_node(std::move(node));
}

template <typename T>
std::vector<Node<T>*> tape_order(const Variable<T>& root) {
  std::vector<Node<T>*> nodes;
  if (!root.requires_grad()) return nodes;
  std::unordered_set<Node<T>*> seen;
  std::vector<Node<T>*> stack{root.node()};
  seen.insert(root.node());
  while (!stack.empty()) {
    Node<T>* n = stack.back();
    stack.pop_back();
    nodes.push_back(n);
    for (const auto& in : n->inputs) {
      if (in.requires_grad() && seen.insert(in.node()).second) stack.push_back(in.node());
    }
  }
  std::sort(nodes.begin(), nodes.end(), [](const Node<T>* a, const Node<T>* b) { return a->id > b->id; });
  return nodes;
}

template <typename T>
std::vector<Variable<T>> grad(const Variable<T>& loss, const std::vector<Variable<T>>& wrt,
                              bool create_graph) {
  if (loss.shape() != Shape{1, 1, 1, 1}) {
    throw ShapeError("backward requires a scalar loss, got " + loss.shape().str());
  }
  std::unordered_map<Node<T>*, Variable<T>> acc;
  std::unordered_set<Node<T>*> keep;
  for (const auto& v : wrt) keep.insert(v.node());

  if (loss.requires_grad()) {
    const auto order = tape_order(loss);
    GradModeGuard mode(create_graph);
    acc.emplace(loss.node(), constant(Tensor<T>::scalar(T(1))));
    for (Node<T>* node : order) {
      auto it = acc.find(node);
      if (it == acc.end() || node->inputs.empty()) continue;
      if (create_graph && !node->second_order) {
        throw NumericalError(std::string("second-order differentiation through '") + node->op +
                             "' is not supported");
      }
      const Variable<T> g = it->second;
      if (!keep.count(node)) acc.erase(it);
      auto input_grads = node->backward(g);
      for (std::size_t i = 0; i < node->inputs.size(); ++i) {
        const auto& in = node->inputs[i];
        if (!in.requires_grad() || i >= input_grads.size() || !input_grads[i].defined()) continue;
        if (input_grads[i].shape() != in.shape()) {
          throw ShapeError(std::string("backward of '") + node->op + "' produced gradient " +
                           input_grads[i].shape().str() + " for input " + in.shape().str());
        }
        auto slot = acc.find(in.node());
        if (slot == acc.end()) {
          acc.emplace(in.node(), input_grads[i]);
        } else {
          slot->second = add(slot->second, input_grads[i]);
        }
      }
    }
  }

  std::vector<Variable<T>> out;
  out.reserve(wrt.size());
  for (const auto& v : wrt) {
    auto it = acc.find(v.node());
    out.push_back(it != acc.end() ? it->second : constant(Tensor<T>(v.shape())));
  }
  return out;
}

template <typename T>
Variable<T> constant(Tensor<T> value) {
  return Variable<T>(std::move(value), false);
}

template <typename T>
Variable<T> detach(const Variable<T>& a) {
  return constant(a.value());
}

template <typename T>
Variable<T> add(const Variable<T>& a, const Variable<T>& b) {
  return record<T>(
      "add", binary_map(a.value(), b.value(), [](T x, T y) { return x + y; }), {a, b},
      [a, b](const Variable<T>& g) -> std::vector<Variable<T>> {
        return {sum_to(g, a.shape()), sum_to(g, b.shape())};
      },
      true);
}

template <typename T>
Variable<T> sub(const Variable<T>& a, const Variable<T>& b) {
  return record<T>(
      "sub", binary_map(a.value(), b.value(), [](T x, T y) { return x - y; }), {a, b},
      [a, b](const Variable<T>& g) -> std::vector<Variable<T>> {
        return {sum_to(g, a.shape()), scale(sum_to(g, b.shape()), -1.0)};
      },
      true);
}

template <typename T>
Variable<T> mul(const Variable<T>& a, const Variable<T>& b) {
  return record<T>(
      "mul", binary_map(a.value(), b.value(), [](T x, T y) { return x * y; }), {a, b},
      [a, b](const Variable<T>& g) -> std::vector<Variable<T>> {
        Variable<T> ga, gb;
        if (a.requires_grad()) ga = sum_to(mul(g, b), a.shape());
        if (b.requires_grad()) gb = sum_to(mul(g, a), b.shape());
        return {ga, gb};
      },
      true);
}

template <typename T>
Variable<T> div(const Variable<T>& a, const Variable<T>& b) {
  return record<T>(
      "div", binary_map(a.value(), b.value(), [](T x, T y) { return x / y; }), {a, b},
      [a, b](const Variable<T>& g) -> std::vector<Variable<T>> {
        Variable<T> ga, gb;
        if (a.requires_grad()) ga = sum_to(div(g, b), a.shape());
        if (b.requires_grad()) gb = scale(sum_to(div(mul(g, a), square(b)), b.shape()), -1.0);
        return {ga, gb};
      },
      false);
}

template <typename T>
Variable<T> square(const Variable<T>& a) {
  return record<T>(
      "square", unary_map(a.value(), [](T x) { return x * x; }), {a},
      [a](const Variable<T>& g) -> std::vector<Variable<T>> { return {mul(g, scale(a, 2.0))}; },
      true);
}

template <typename T>
Variable<T> scale(const Variable<T>& a, double s) {
  const T st = static_cast<T>(s);
  return record<T>(
      "scale", unary_map(a.value(), [st](T x) { return x * st; }), {a},
      [s](const Variable<T>& g) -> std::vector<Variable<T>> { return {scale(g, s)}; }, true);
}

template <typename T>
Variable<T> add_scalar(const Variable<T>& a, double s) {
  const T st = static_cast<T>(s);
  return record<T>(
      "add_scalar", unary_map(a.value(), [st](T x) { return x + st; }), {a},
      [](const Variable<T>& g) -> std::vector<Variable<T>> { return {g}; }, true);
}

template <typename T>
Variable<T> sqrt(const Variable<T>& a) {
  return pointwise<T>(
      "sqrt", a, [](T x) { return std::sqrt(x); }, [](T, T y) { return T(0.5) / y; }, false);
}

template <typename T>
Variable<T> tanh(const Variable<T>& a) {
  return pointwise<T>(
      "tanh", a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; }, false);
}

template <typename T>
Variable<T> sigmoid(const Variable<T>& a) {
  return pointwise<T>(
      "sigmoid", a,
      [](T x) {
        // Split by sign so exp never overflows.
        if (x >= 0) return T(1) / (T(1) + std::exp(-x));
        const T e = std::exp(x);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); }, false);
}

template <typename T>
Variable<T> log_clamped(const Variable<T>& a, double floor) {
  const T f = static_cast<T>(floor);
  return pointwise<T>(
      "log", a, [f](T x) { return std::log(std::max(x, f)); },
      [f](T x, T) { return x > f ? T(1) / x : T(0); }, false);
}

template <typename T>
Variable<T> abs(const Variable<T>& a) {
  return pointwise<T>(
      "abs", a, [](T x) { return std::abs(x); },
      [](T x, T) { return x > 0 ? T(1) : (x < 0 ? T(-1) : T(0)); }, false);
}

template <typename T>
Variable<T> relu(const Variable<T>& a) {
  return pointwise<T>(
      "relu", a, [](T x) { return x > 0 ? x : T(0); }, [](T x, T) { return x > 0 ? T(1) : T(0); },
      false);
}

template <typename T>
Variable<T> leaky_relu(const Variable<T>& a, double slope) {
  const T s = static_cast<T>(slope);
  return pointwise<T>(
      "leaky_relu", a, [s](T x) { return x > 0 ? x : s * x; }, [s](T x, T) { return x > 0 ? T(1) : s; },
      true);
}

template <typename T>
Variable<T> reduce_sum(const Variable<T>& a, unsigned axes) {
  const Shape in_shape = a.shape();
  return record<T>(
      "reduce_sum", sum_raw(a.value(), axes), {a},
      [in_shape](const Variable<T>& g) -> std::vector<Variable<T>> { return {expand(g, in_shape)}; },
      true);
}

template <typename T>
Variable<T> reduce_mean(const Variable<T>& a, unsigned axes) {
  const Shape in_shape = a.shape();
  const Shape out_shape = reduced_shape(in_shape, axes);
  if (out_shape.numel() == 0 || in_shape.numel() == 0) throw ShapeError("reduce_mean of empty tensor");
  const double inv = static_cast<double>(out_shape.numel()) / static_cast<double>(in_shape.numel());
  Tensor<T> s = sum_raw(a.value(), axes);
  for (std::int64_t i = 0; i < s.numel(); ++i) s[i] = static_cast<T>(s[i] * inv);
  return record<T>(
      "reduce_mean", std::move(s), {a},
      [in_shape, inv](const Variable<T>& g) -> std::vector<Variable<T>> {
        return {scale(expand(g, in_shape), inv)};
      },
      true);
}

template <typename T>
Variable<T> expand(const Variable<T>& a, const Shape& shape) {
  if (a.shape() == shape) return a;
  broadcast_axes(shape, a.shape());
  const Shape in_shape = a.shape();
  return record<T>(
      "expand", expand_raw(a.value(), shape), {a},
      [in_shape](const Variable<T>& g) -> std::vector<Variable<T>> { return {sum_to(g, in_shape)}; },
      true);
}

template <typename T>
Variable<T> sum_to(const Variable<T>& a, const Shape& shape) {
  if (a.shape() == shape) return a;
  return reduce_sum(a, broadcast_axes(a.shape(), shape));
}

#define SELFSR_INSTANTIATE(T)                                                                    \
  template class Variable<T>;                                                                    \
  template Variable<T> record<T>(const char*, Tensor<T>, std::vector<Variable<T>>, BackwardFn<T>, \
                                 bool);                                                          \
  template std::vector<Node<T>*> tape_order<T>(const Variable<T>&);                               \
  template std::vector<Variable<T>> grad<T>(const Variable<T>&, const std::vector<Variable<T>>&,  \
                                            bool);                                               \
  template Variable<T> constant<T>(Tensor<T>);                                                   \
  template Variable<T> detach<T>(const Variable<T>&);                                            \
  template Variable<T> add<T>(const Variable<T>&, const Variable<T>&);                           \
  template Variable<T> sub<T>(const Variable<T>&, const Variable<T>&);                           \
  template Variable<T> mul<T>(const Variable<T>&, const Variable<T>&);                           \
  template Variable<T> div<T>(const Variable<T>&, const Variable<T>&);                           \
  template Variable<T> square<T>(const Variable<T>&);                                            \
  template Variable<T> scale<T>(const Variable<T>&, double);                                     \
  template Variable<T> add_scalar<T>(const Variable<T>&, double);                                \
  template Variable<T> sqrt<T>(const Variable<T>&);                                              \
  template Variable<T> tanh<T>(const Variable<T>&);                                              \
  template Variable<T> sigmoid<T>(const Variable<T>&);                                           \
  template Variable<T> log_clamped<T>(const Variable<T>&, double);                               \
  template Variable<T> abs<T>(const Variable<T>&);                                               \
  template Variable<T> relu<T>(const Variable<T>&);                                              \
  template Variable<T> leaky_relu<T>(const Variable<T>&, double);                                \
  template Variable<T> reduce_sum<T>(const Variable<T>&, unsigned);                              \
  template Variable<T> reduce_mean<T>(const Variable<T>&, unsigned);                             \
  template Variable<T> expand<T>(const Variable<T>&, const Shape&);                              \
  template Variable<T> sum_to<T>(const Variable<T>&, const Shape&);

SELFSR_INSTANTIATE(float)
SELFSR_INSTANTIATE(double)

#undef SELFSR_INSTANTIATE

}  // namespace selfsr
