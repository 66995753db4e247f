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

#ifndef SELFSR_OPTIM_HPP_
#define SELFSR_OPTIM_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "selfsr/params.hpp"

namespace selfsr {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
};

/// First and second moments for one parameter. `t` counts the updates this
/// parameter has received, so layers added by a grow step get their own
/// bias correction.
template <typename T>
struct AdamMoments {
  Tensor<T> m;
  Tensor<T> v;
  std::int64_t t = 0;
};

template <typename T>
struct AdamState {
  AdamHyper hyper;
  std::int64_t t = 0;  // adam_step calls
  std::map<std::string, AdamMoments<T>> moments;
};

/// Bias-corrected Adam update of every parameter under `prefix` (in stored,
/// pre-equalization units). Throws if a parameter has no gradient.
template <typename T>
void adam_step(ParamStore<T>& params, const GradientMap<T>& grads, AdamState<T>& state, double lr,
               std::string_view prefix = {});

}  // namespace selfsr

#endif  // SELFSR_OPTIM_HPP_
