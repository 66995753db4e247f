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

#include "selfsr/optim.hpp"

#include <cmath>

namespace selfsr {

template <typename T>
void adam_step(ParamStore<T>& params, const GradientMap<T>& grads, AdamState<T>& state, double lr,
               std::string_view prefix) {
  const auto names = params.names(prefix);
  for (const auto& name : names) {
    auto g = grads.find(name);
    if (g == grads.end() || !g->second.defined()) {
      throw Error("adam_step: missing gradient for trainable parameter '" + name + "'");
    }
    if (g->second.shape() != params.at(name).var.shape()) {
      throw ShapeError("adam_step: gradient shape mismatch for '" + name + "'");
    }
  }
  ++state.t;
  const auto [b1, b2, eps] = state.hyper;
  for (const auto& name : names) {
    Tensor<T>& w = params.at(name).var.mutable_value();
    const Tensor<T>& gv = grads.at(name).value();
    auto [slot, fresh] = state.moments.try_emplace(name);
    AdamMoments<T>& mom = slot->second;
    if (fresh) {
      mom.m = Tensor<T>(w.shape());
      mom.v = Tensor<T>(w.shape());
    }
    ++mom.t;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(mom.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(mom.t));
    for (std::int64_t i = 0; i < w.numel(); ++i) {
      const double gi = gv[i];
      const double m = b1 * mom.m[i] + (1.0 - b1) * gi;
      const double v = b2 * mom.v[i] + (1.0 - b2) * gi * gi;
      mom.m[i] = static_cast<T>(m);
      mom.v[i] = static_cast<T>(v);
      const double m_hat = m / c1;
      const double v_hat = v / c2;
      w[i] = static_cast<T>(w[i] - lr * m_hat / (std::sqrt(v_hat) + eps));
    }
  }
}

template void adam_step<float>(ParamStore<float>&, const GradientMap<float>&, AdamState<float>&, double,
                               std::string_view);
template void adam_step<double>(ParamStore<double>&, const GradientMap<double>&, AdamState<double>&, double,
                                std::string_view);

}  // namespace selfsr
