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

#ifndef SELFSR_DEGRADATION_HPP_
#define SELFSR_DEGRADATION_HPP_

#include <cstdint>
#include <vector>

#include "selfsr/params.hpp"

namespace selfsr {

/// Pixel-unit displacement map (n, 2, h, w); channel 0 = dx, channel 1 = dy.
/// |dx|, |dy| <= max_disp holds by construction of the flow head.
template <typename T>
struct FlowField {
  Variable<T> offsets;
  double max_disp = 2.0;
};

/// Result of the degradation generator: the image-branch output, the flow,
/// and the warped image. degraded == grid_sample(intermediate, flow).
template <typename T>
struct DegradationOutput {
  Variable<T> intermediate;
  FlowField<T> flow;
  Variable<T> degraded;
};

struct DegradeNetConfig {
  std::int64_t base_width = 32;
  double max_disp = 2.0;
};

/// Encoder-decoder with two stride-2 levels, additive skips and twin heads:
/// a tanh RGB head and a max_disp * tanh flow head whose weights start at
/// zero, so a fresh network warps by the identity.
class DegradationNet {
 public:
  explicit DegradationNet(DegradeNetConfig cfg = {});

  const DegradeNetConfig& config() const { return cfg_; }

  template <typename T>
  void init(ParamStore<T>& store, std::uint64_t seed) const;

  /// Input (n, 3, h, w) in [-1, 1]; h and w must be divisible by 4.
  template <typename T>
  DegradationOutput<T> forward(const ParamStore<T>& store, const Variable<T>& clean_lr) const;

  static constexpr const char* kPrefix = "G.";

 private:
  DegradeNetConfig cfg_;
  std::vector<ConvLayer> layers_;  // enc0 enc1 enc2 mid dec1 dec0 image flow
};

/// Patch discriminator for LR images: two stride-2 levels, raw logits out.
class LrDiscriminator {
 public:
  explicit LrDiscriminator(std::int64_t base_width = 32);

  std::int64_t base_width() const { return base_width_; }

  template <typename T>
  void init(ParamStore<T>& store, std::uint64_t seed) const;
  template <typename T>
  Variable<T> forward(const ParamStore<T>& store, const Variable<T>& x) const;

  static constexpr const char* kPrefix = "D.";

 private:
  std::int64_t base_width_;
  std::vector<ConvLayer> layers_;
};

template <typename T>
struct AdversarialLosses {
  Variable<T> d_loss;
  Variable<T> g_loss;
};

/// -E log D(real) - E log(1 - D(fake)), with D = sigmoid(logits) and logs
/// clamped at 1e-8.
template <typename T>
Variable<T> lr_discriminator_loss(const Variable<T>& real_logits, const Variable<T>& fake_logits);

/// Non-saturating generator term -E log D(fake).
template <typename T>
Variable<T> lr_generator_loss(const Variable<T>& fake_logits);

/// Both LR adversarial terms. The discriminator term sees a detached copy of
/// `fake_lr`; the generator term keeps the path back to the generator.
template <typename T>
AdversarialLosses<T> loss_adv_lr(const LrDiscriminator& disc, const ParamStore<T>& store,
                                 const Variable<T>& real_lr, const Variable<T>& fake_lr);

/// Mean absolute difference; shapes must match exactly.
template <typename T>
Variable<T> l1_mean(const Variable<T>& a, const Variable<T>& b);

template <typename T>
Variable<T> loss_identity(const Variable<T>& intermediate, const Variable<T>& clean_lr) {
  return l1_mean(intermediate, clean_lr);
}

/// mean |horizontal forward differences| + mean |vertical forward
/// differences|, each mean taken over its own valid sites and both flow
/// channels.
template <typename T>
Variable<T> loss_smooth(const FlowField<T>& flow);

struct Stage1Weights {
  double identity = 10.0;
  double smooth = 1.0;
};

template <typename T>
Variable<T> stage1_total(const Variable<T>& adv, const Variable<T>& idt, const Variable<T>& smooth,
                         const Stage1Weights& weights = {});

/// Re-warps the intermediate image with flow + N(0, noise_std^2) noise,
/// clamped to [-max_disp, max_disp]. Deterministic per seed.
template <typename T>
Tensor<T> perturb_flow(const DegradationOutput<T>& out, double noise_std, std::uint64_t seed);

}  // namespace selfsr

#endif  // SELFSR_DEGRADATION_HPP_
