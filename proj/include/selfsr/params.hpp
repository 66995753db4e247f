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

#ifndef SELFSR_PARAMS_HPP_
#define SELFSR_PARAMS_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "selfsr/autodiff.hpp"
#include "selfsr/imageops.hpp"

namespace selfsr {

/// A trainable leaf plus its equalized-learning-rate multiplier. The stored
/// value is what the optimizer sees; forward passes use scale * value.
template <typename T>
struct Parameter {
  Variable<T> var;
  double scale = 1.0;
};

template <typename T>
using GradientMap = std::map<std::string, Variable<T>>;

/// Named trainable tensors, iterated in lexicographic name order. Copies are
/// deep: a copied store never aliases the original's tensors.
template <typename T>
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore& other);
  ParamStore& operator=(const ParamStore& other);
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  void add(const std::string& name, Tensor<T> init, double scale);
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  const Parameter<T>& at(const std::string& name) const;
  Parameter<T>& at(const std::string& name);
  /// scale * stored value, recorded on the tape.
  Variable<T> effective(const std::string& name) const;

  std::vector<std::string> names(std::string_view prefix = {}) const;
  const std::map<std::string, Parameter<T>>& items() const { return params_; }
  std::size_t size() const { return params_.size(); }

 private:
  std::map<std::string, Parameter<T>> params_;
};

/// Gradients of `loss` for every parameter whose name starts with `prefix`.
template <typename T>
GradientMap<T> backward(const Variable<T>& loss, const ParamStore<T>& store, std::string_view prefix = {},
                        bool create_graph = false);

/// Unit-normal tensor seeded from (seed, name) so initialization does not
/// depend on creation order.
template <typename T>
Tensor<T> normal_init(const Shape& shape, std::uint64_t seed, std::string_view name);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ull);

/// Convolution with equalized learning rate: runtime multiplier
/// gain / sqrt(fan_in) applied to unit-normal stored weights.
struct ConvLayer {
  enum class Init { kNormal, kZero };

  std::string name;
  ConvSpec spec;
  double gain = std::sqrt(2.0);
  Init init = Init::kNormal;
  double bias_init = 0.0;

  double equalized_scale() const { return gain / std::sqrt(static_cast<double>(spec.fan_in())); }
  std::string weight_name() const { return name + ".w"; }
  std::string bias_name() const { return name + ".b"; }

  template <typename T>
  void create(ParamStore<T>& store, std::uint64_t seed) const;
  template <typename T>
  Variable<T> forward(const ParamStore<T>& store, const Variable<T>& x) const;
  /// Number of stored scalars (weights + bias).
  std::int64_t parameter_count() const { return spec.out_ch * spec.fan_in() + spec.out_ch; }
};

}  // namespace selfsr

#endif  // SELFSR_PARAMS_HPP_
