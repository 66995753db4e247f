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

#include "selfsr/degradation.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace selfsr {
namespace {

constexpr double kSlope = 0.2;

enum DegradeLayer { kEnc0, kEnc1, kEnc2, kMid, kDec1, kDec0, kImage, kFlow };

ConvLayer conv(std::string name, std::int64_t in, std::int64_t out, std::int64_t k, std::int64_t stride) {
  ConvLayer l;
  l.name = std::move(name);
  l.spec = ConvSpec{in, out, k, stride};
  return l;
}

template <typename T>
Variable<T> upsample2(const Variable<T>& x) {
  return resize(x, x.shape().h() * 2, x.shape().w() * 2, ResizeKind::kNearest);
}

}  // namespace

DegradationNet::DegradationNet(DegradeNetConfig cfg) : cfg_(cfg) {
  if (cfg_.base_width <= 0) throw ConfigError("degradation base_width must be positive");
  if (!(cfg_.max_disp > 0.0)) throw ConfigError("max_disp must be positive");
  const std::int64_t w = cfg_.base_width;
  const std::string p = kPrefix;
  layers_ = {conv(p + "enc0", 3, w, 3, 1),         conv(p + "enc1", w, 2 * w, 3, 2),
             conv(p + "enc2", 2 * w, 4 * w, 3, 2), conv(p + "mid", 4 * w, 4 * w, 3, 1),
             conv(p + "dec1", 4 * w, 2 * w, 3, 1), conv(p + "dec0", 2 * w, w, 3, 1),
             conv(p + "image", w, 3, 3, 1),        conv(p + "flow", w, 2, 3, 1)};
  layers_[kImage].gain = 1.0;
  layers_[kFlow].gain = 1.0;
  layers_[kFlow].init = ConvLayer::Init::kZero;
}

template <typename T>
void DegradationNet::init(ParamStore<T>& store, std::uint64_t seed) const {
  for (const auto& l : layers_) l.create(store, seed);
}

template <typename T>
DegradationOutput<T> DegradationNet::forward(const ParamStore<T>& store, const Variable<T>& clean_lr) const {
  const Shape s = clean_lr.shape();
  if (s.c() != 3) throw ShapeError("degradation input must have 3 channels, got " + s.str());
  if (s.h() % 4 != 0 || s.w() % 4 != 0) {
    throw ShapeError("degradation input height and width must be divisible by 4, got " + s.str());
  }
  const auto& L = layers_;
  auto e0 = leaky_relu(L[kEnc0].forward(store, clean_lr), kSlope);
  auto e1 = leaky_relu(L[kEnc1].forward(store, e0), kSlope);
  auto e2 = leaky_relu(L[kEnc2].forward(store, e1), kSlope);
  auto m = leaky_relu(L[kMid].forward(store, e2), kSlope);
  auto d1 = add(leaky_relu(L[kDec1].forward(store, upsample2(m)), kSlope), e1);
  auto d0 = add(leaky_relu(L[kDec0].forward(store, upsample2(d1)), kSlope), e0);

  DegradationOutput<T> out;
  out.intermediate = tanh(L[kImage].forward(store, d0));
  out.flow.max_disp = cfg_.max_disp;
  out.flow.offsets = scale(tanh(L[kFlow].forward(store, d0)), cfg_.max_disp);
  out.degraded = grid_sample(out.intermediate, out.flow.offsets);
  return out;
}

LrDiscriminator::LrDiscriminator(std::int64_t base_width) : base_width_(base_width) {
  if (base_width <= 0) throw ConfigError("discriminator base_width must be positive");
  const std::int64_t w = base_width;
  const std::string p = kPrefix;
  layers_ = {conv(p + "conv0", 3, w, 3, 1), conv(p + "conv1", w, 2 * w, 3, 2),
             conv(p + "conv2", 2 * w, 4 * w, 3, 2), conv(p + "logits", 4 * w, 1, 1, 1)};
  layers_.back().gain = 1.0;
}

template <typename T>
void LrDiscriminator::init(ParamStore<T>& store, std::uint64_t seed) const {
  for (const auto& l : layers_) l.create(store, seed);
}

template <typename T>
Variable<T> LrDiscriminator::forward(const ParamStore<T>& store, const Variable<T>& x) const {
  Variable<T> h = x;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) h = leaky_relu(layers_[i].forward(store, h), kSlope);
  return layers_.back().forward(store, h);
}

template <typename T>
Variable<T> lr_discriminator_loss(const Variable<T>& real_logits, const Variable<T>& fake_logits) {
  auto real_term = reduce_mean(log_clamped(sigmoid(real_logits)), kAllAxes);
  // log(1 - sigmoid(z)) evaluated as log(sigmoid(-z)).
  auto fake_term = reduce_mean(log_clamped(sigmoid(scale(fake_logits, -1.0))), kAllAxes);
  return scale(add(real_term, fake_term), -1.0);
}

template <typename T>
Variable<T> lr_generator_loss(const Variable<T>& fake_logits) {
  return scale(reduce_mean(log_clamped(sigmoid(fake_logits)), kAllAxes), -1.0);
}

template <typename T>
AdversarialLosses<T> loss_adv_lr(const LrDiscriminator& disc, const ParamStore<T>& store,
                                 const Variable<T>& real_lr, const Variable<T>& fake_lr) {
  AdversarialLosses<T> out;
  out.d_loss = lr_discriminator_loss(disc.forward(store, detach(real_lr)), disc.forward(store, detach(fake_lr)));
  out.g_loss = lr_generator_loss(disc.forward(store, fake_lr));
  return out;
}

template <typename T>
Variable<T> l1_mean(const Variable<T>& a, const Variable<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("L1 loss operands differ in shape: " + a.shape().str() + " vs " + b.shape().str());
  }
  return reduce_mean(abs(sub(a, b)), kAllAxes);
}

template <typename T>
Variable<T> loss_smooth(const FlowField<T>& flow) {
  const auto& f = flow.offsets;
  auto horizontal = reduce_mean(abs(forward_diff(f, kAxisW)), kAllAxes);
  auto vertical = reduce_mean(abs(forward_diff(f, kAxisH)), kAllAxes);
  return add(horizontal, vertical);
}

template <typename T>
Variable<T> stage1_total(const Variable<T>& adv, const Variable<T>& idt, const Variable<T>& smooth,
                         const Stage1Weights& weights) {
  return add(add(adv, scale(idt, weights.identity)), scale(smooth, weights.smooth));
}

template <typename T>
Tensor<T> perturb_flow(const DegradationOutput<T>& out, double noise_std, std::uint64_t seed) {
  if (noise_std < 0.0) throw ConfigError("perturbation noise_std must be non-negative");
  NoGradGuard no_grad;
  Tensor<T> flow = out.flow.offsets.value();
  if (noise_std > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_std);
    const double bound = out.flow.max_disp;
    for (auto& v : flow.data()) v = static_cast<T>(std::clamp(v + noise(rng), -bound, bound));
  }
  return grid_sample(detach(out.intermediate), constant(std::move(flow))).value();
}

#define SELFSR_INSTANTIATE(T)                                                                        \
  template void DegradationNet::init<T>(ParamStore<T>&, std::uint64_t) const;                       \
  template DegradationOutput<T> DegradationNet::forward<T>(const ParamStore<T>&, const Variable<T>&) \
      const;                                                                                         \
  template void LrDiscriminator::init<T>(ParamStore<T>&, std::uint64_t) const;                      \
  template Variable<T> LrDiscriminator::forward<T>(const ParamStore<T>&, const Variable<T>&) const;  \
  template Variable<T> lr_discriminator_loss<T>(const Variable<T>&, const Variable<T>&);            \
  template Variable<T> lr_generator_loss<T>(const Variable<T>&);                                     \
  template AdversarialLosses<T> loss_adv_lr<T>(const LrDiscriminator&, const ParamStore<T>&,        \
                                               const Variable<T>&, const Variable<T>&);             \
  template Variable<T> l1_mean<T>(const Variable<T>&, const Variable<T>&);                          \
  template Variable<T> loss_smooth<T>(const FlowField<T>&);                                          \
  template Variable<T> stage1_total<T>(const Variable<T>&, const Variable<T>&, const Variable<T>&,  \
                                       const Stage1Weights&);                                        \
  template Tensor<T> perturb_flow<T>(const DegradationOutput<T>&, double, std::uint64_t);

SELFSR_INSTANTIATE(float)
SELFSR_INSTANTIATE(double)

#undef SELFSR_INSTANTIATE

}  // namespace selfsr
