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

#include "selfsr/params.hpp"

#include <random>

namespace selfsr {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <typename T>
ParamStore<T>::ParamStore(const ParamStore& other) {
  *this = other;
}

template <typename T>
ParamStore<T>& ParamStore<T>::operator=(const ParamStore& other) {
  if (this == &other) return *this;
  params_.clear();
  for (const auto& [name, p] : other.params_) {
    params_.emplace(name, Parameter<T>{Variable<T>(p.var.value(), true), p.scale});
  }
  return *this;
}

template <typename T>
void ParamStore<T>::add(const std::string& name, Tensor<T> init, double scale) {
  if (params_.count(name)) throw Error("duplicate parameter '" + name + "'");
  params_.emplace(name, Parameter<T>{Variable<T>(std::move(init), true), scale});
}

template <typename T>
const Parameter<T>& ParamStore<T>::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter '" + name + "'");
  return it->second;
}

template <typename T>
Parameter<T>& ParamStore<T>::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter '" + name + "'");
  return it->second;
}

template <typename T>
Variable<T> ParamStore<T>::effective(const std::string& name) const {
  const Parameter<T>& p = at(name);
  return p.scale == 1.0 ? p.var : selfsr::scale(p.var, p.scale);
}

template <typename T>
std::vector<std::string> ParamStore<T>::names(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, p] : params_) {
    if (std::string_view(name).substr(0, prefix.size()) == prefix) out.push_back(name);
  }
  return out;
}

template <typename T>
GradientMap<T> backward(const Variable<T>& loss, const ParamStore<T>& store, std::string_view prefix,
                        bool create_graph) {
  const auto names = store.names(prefix);
  std::vector<Variable<T>> vars;
  vars.reserve(names.size());
  for (const auto& n : names) vars.push_back(store.at(n).var);
  auto grads = grad(loss, vars, create_graph);
  GradientMap<T> out;
  for (std::size_t i = 0; i < names.size(); ++i) out.emplace(names[i], std::move(grads[i]));
  return out;
}

template <typename T>
Tensor<T> normal_init(const Shape& shape, std::uint64_t seed, std::string_view name) {
  std::mt19937_64 rng(fnv1a(name, seed * 0x9E3779B97F4A7C15ull + 1469598103934665603ull));
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor<T> t(shape);
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
void ConvLayer::create(ParamStore<T>& store, std::uint64_t seed) const {
  spec.validate();
  const Shape ws{spec.out_ch, spec.in_ch, spec.kernel, spec.kernel};
  Tensor<T> w = init == Init::kNormal ? normal_init<T>(ws, seed, weight_name()) : Tensor<T>(ws);
  store.add(weight_name(), std::move(w), equalized_scale());
  store.add(bias_name(), Tensor<T>(Shape{1, spec.out_ch, 1, 1}, static_cast<T>(bias_init)), 1.0);
}

template <typename T>
Variable<T> ConvLayer::forward(const ParamStore<T>& store, const Variable<T>& x) const {
  return conv2d(x, store.effective(weight_name()), store.effective(bias_name()), spec);
}

#define SELFSR_INSTANTIATE(T)                                                                       \
  template class ParamStore<T>;                                                                     \
  template GradientMap<T> backward<T>(const Variable<T>&, const ParamStore<T>&, std::string_view,   \
                                      bool);                                                        \
  template Tensor<T> normal_init<T>(const Shape&, std::uint64_t, std::string_view);                 \
  template void ConvLayer::create<T>(ParamStore<T>&, std::uint64_t) const;                          \
  template Variable<T> ConvLayer::forward<T>(const ParamStore<T>&, const Variable<T>&) const;

SELFSR_INSTANTIATE(float)
SELFSR_INSTANTIATE(double)

#undef SELFSR_INSTANTIATE

}  // namespace selfsr
