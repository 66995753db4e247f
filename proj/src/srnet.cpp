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

#include "selfsr/srnet.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <string>

namespace selfsr {
namespace {

constexpr double kSlope = 0.2;

ConvLayer conv(std::string name, std::int64_t in, std::int64_t out, std::int64_t k, std::int64_t stride,
               double gain = std::sqrt(2.0)) {
  ConvLayer l;
  l.name = std::move(name);
  l.spec = ConvSpec{in, out, k, stride};
  l.gain = gain;
  return l;
}

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

std::string level_name(const char* prefix, int level) { return std::string(prefix) + "level" + std::to_string(level); }

}  // namespace

int SRNetConfig::num_levels() const { return std::countr_zero(static_cast<unsigned>(final_scale)); }

std::int64_t SRNetConfig::width(int level) const {
  if (level <= 0) return base_width;
  return std::max(min_width, base_width >> (level - 1));
}

void SRNetConfig::validate() const {
  if (base_width <= 0 || min_width <= 0) throw ConfigError("SR widths must be positive");
  if (blocks_per_level <= 0) throw ConfigError("blocks_per_level must be positive");
  if (final_scale < 2 || !is_power_of_two(final_scale)) {
    throw ConfigError("final_scale must be a power of two >= 2, got " + std::to_string(final_scale));
  }
  if (!(eps > 0.0)) throw ConfigError("normalization eps must be positive");
}

int ProgressiveState::max_levels() const { return std::countr_zero(static_cast<unsigned>(final_scale)); }

template <typename T>
Variable<T> instance_normalize(const Variable<T>& f, double eps) {
  auto mu = reduce_mean(f, kAxesHW);
  auto centered = sub(f, mu);
  auto var = reduce_mean(square(centered), kAxesHW);
  return div(centered, sqrt(add_scalar(var, eps)));
}

template <typename T>
Variable<T> self_cond_norm(const Variable<T>& f, const Variable<T>& gamma, double eps) {
  if (gamma.shape() != f.shape()) {
    throw ShapeError("modulation map " + gamma.shape().str() + " does not match activation " + f.shape().str());
  }
  return mul(gamma, instance_normalize(f, eps));
}

template <typename T>
void SelfCondBlock::create(ParamStore<T>& store, std::uint64_t seed) const {
  main.create(store, seed);
  cond0.create(store, seed);
  cond1.create(store, seed);
}

template <typename T>
Variable<T> SelfCondBlock::gamma(const ParamStore<T>& store, const Variable<T>& cond_img) const {
  return cond1.forward(store, leaky_relu(cond0.forward(store, cond_img), kSlope));
}

template <typename T>
Variable<T> SelfCondBlock::forward(const ParamStore<T>& store, const Variable<T>& x,
                                   const Variable<T>& cond_img) const {
  const Shape xs = x.shape();
  const Shape cs = cond_img.shape();
  if (xs.n() != cs.n() || xs.h() != cs.h() || xs.w() != cs.w()) {
    throw ShapeError("condition image " + cs.str() + " does not match activation " + xs.str());
  }
  return self_cond_norm(main.forward(store, x), gamma(store, cond_img), eps);
}

SrGenerator::SrGenerator(SRNetConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const std::string p = kPrefix;
  stem_ = conv(p + "stem", 3, cfg_.width(0), 3, 1);
  for (int level = 1; level <= cfg_.num_levels(); ++level) {
    const std::string ln = level_name(kPrefix, level);
    const std::int64_t w = cfg_.width(level);
    std::vector<SelfCondBlock> level_blocks;
    for (int b = 0; b < cfg_.blocks_per_level; ++b) {
      const std::string bn = ln + ".block" + std::to_string(b);
      const std::int64_t in = b == 0 ? cfg_.width(level - 1) : w;
      SelfCondBlock block;
      block.main = conv(bn + ".main", in, w, 3, 1);
      block.cond0 = conv(bn + ".cond0", 3, w, 3, 1);
      block.cond1 = conv(bn + ".cond1", w, w, 3, 1, 1.0);
      block.cond1.bias_init = 1.0;
      block.eps = cfg_.eps;
      level_blocks.push_back(std::move(block));
    }
    blocks_.push_back(std::move(level_blocks));
    to_rgb_.push_back(conv(ln + ".to_rgb", w, 3, 1, 1, 1.0));
  }
}

template <typename T>
void SrGenerator::init(ParamStore<T>& store, std::uint64_t seed) const {
  stem_.create(store, seed);
  init_level(store, 1, seed);
}

template <typename T>
void SrGenerator::init_level(ParamStore<T>& store, int level, std::uint64_t seed) const {
  if (level < 1 || level > cfg_.num_levels()) throw Error("generator level out of range");
  for (const auto& b : blocks(level)) b.create(store, seed);
  to_rgb_[level - 1].create(store, seed);
}

template <typename T>
Variable<T> SrGenerator::forward(const ParamStore<T>& store, const Variable<T>& lr_img,
                                 const ProgressiveState& state, double fade_alpha) const {
  const int levels = state.active_levels;
  if (levels < 1) throw Error("SR forward needs at least one active level");
  if (levels > cfg_.num_levels()) throw Error("active levels exceed the configured final scale");
  const Shape s = lr_img.shape();
  if (s.c() != 3) throw ShapeError("SR input must have 3 channels, got " + s.str());

  Variable<T> h = leaky_relu(stem_.forward(store, lr_img), kSlope);
  Variable<T> previous_rgb;
  const bool fading = fade_alpha < 1.0 && levels >= 2;
  for (int level = 1; level <= levels; ++level) {
    const std::int64_t oh = s.h() << level;
    const std::int64_t ow = s.w() << level;
    h = resize(h, oh, ow, ResizeKind::kNearest);
    const Variable<T> cond = constant(resize(detach(lr_img), oh, ow, ResizeKind::kBicubic).value());
    for (const auto& block : blocks(level)) h = leaky_relu(block.forward(store, h, cond), kSlope);
    if (fading && level == levels - 1) {
      auto rgb = tanh(to_rgb_[level - 1].forward(store, h));
      previous_rgb = resize(rgb, oh * 2, ow * 2, ResizeKind::kNearest);
    }
  }
  Variable<T> out = tanh(to_rgb_[levels - 1].forward(store, h));
  if (fading) {
    const double a = std::clamp(fade_alpha, 0.0, 1.0);
    out = add(scale(previous_rgb, 1.0 - a), scale(out, a));
  }
  return out;
}

template <typename T>
std::vector<Tensor<T>> SrGenerator::condition_features(const ParamStore<T>& store, const Variable<T>& lr_img,
                                                       int level, const ProgressiveState& state) const {
  if (level < 1 || level > state.active_levels) {
    throw Error("level " + std::to_string(level) + " is not active (active levels: " +
                std::to_string(state.active_levels) + ")");
  }
  NoGradGuard no_grad;
  const Shape s = lr_img.shape();
  const auto oh = s.h() << level;
  const auto ow = s.w() << level;
  const Variable<T> cond = resize(detach(lr_img), oh, ow, ResizeKind::kBicubic);
  const Tensor<T> g = blocks(level).front().gamma(store, cond).value();
  std::vector<Tensor<T>> maps;
  for (std::int64_t c = 0; c < g.shape().c(); ++c) {
    Tensor<T> m(Shape{1, 1, oh, ow});
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::int64_t y = 0; y < oh; ++y)
      for (std::int64_t x = 0; x < ow; ++x) {
        const double v = g.at(0, c, y, x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    const double range = hi - lo;
    for (std::int64_t y = 0; y < oh; ++y)
      for (std::int64_t x = 0; x < ow; ++x) {
        m.at(0, 0, y, x) = range > 0.0 ? static_cast<T>((g.at(0, c, y, x) - lo) / range) : T(0);
      }
    maps.push_back(std::move(m));
  }
  return maps;
}

int SrGenerator::conv_layers_per_level(int level) const {
  if (level < 1 || level > cfg_.num_levels()) throw Error("generator level out of range");
  return static_cast<int>(blocks(level).size()) * 3 + 1;
}

HrDiscriminator::HrDiscriminator(SRNetConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  for (int level = 1; level <= cfg_.num_levels(); ++level) {
    const std::string ln = level_name(kPrefix, level);
    from_rgb_.push_back(conv(ln + ".from_rgb", 3, cfg_.width(level), 1, 1));
    down_.push_back(conv(ln + ".down", cfg_.width(level), cfg_.width(level - 1), 3, 2));
  }
  const std::string p = kPrefix;
  head_conv_ = conv(p + "head.conv", cfg_.width(0), cfg_.width(0), 3, 1);
  head_score_ = conv(p + "head.score", cfg_.width(0), 1, 1, 1, 1.0);
}

template <typename T>
void HrDiscriminator::init(ParamStore<T>& store, std::uint64_t seed) const {
  head_conv_.create(store, seed);
  head_score_.create(store, seed);
  init_level(store, 1, seed);
}

template <typename T>
void HrDiscriminator::init_level(ParamStore<T>& store, int level, std::uint64_t seed) const {
  if (level < 1 || level > cfg_.num_levels()) throw Error("discriminator level out of range");
  from_rgb_[level - 1].create(store, seed);
  down_[level - 1].create(store, seed);
}

template <typename T>
Variable<T> HrDiscriminator::forward(const ParamStore<T>& store, const Variable<T>& x, int active_levels) const {
  if (active_levels < 1 || active_levels > cfg_.num_levels()) throw Error("discriminator level out of range");
  Variable<T> h = leaky_relu(from_rgb_[active_levels - 1].forward(store, x), kSlope);
  for (int level = active_levels; level >= 1; --level) {
    h = leaky_relu(down_[level - 1].forward(store, h), kSlope);
  }
  h = leaky_relu(head_conv_.forward(store, h), kSlope);
  return reduce_mean(head_score_.forward(store, h), kAxesHW);
}

template <typename T>
void grow(ProgressiveState& state, ParamStore<T>& store, const SrGenerator& gen, const HrDiscriminator& disc,
          std::uint64_t seed) {
  if (state.at_final()) {
    throw Error("cannot grow past final scale x" + std::to_string(state.final_scale));
  }
  const int next = state.active_levels + 1;
  gen.init_level(store, next, seed);
  disc.init_level(store, next, seed);
  state.active_levels = next;
}

template <typename T>
Variable<T> hr_discriminator_loss(const Variable<T>& real_scores, const Variable<T>& fake_scores) {
  auto real_term = reduce_mean(relu(scale(add_scalar(real_scores, -1.0), -1.0)), kAllAxes);
  auto fake_term = reduce_mean(relu(add_scalar(fake_scores, 1.0)), kAllAxes);
  return add(real_term, fake_term);
}

template <typename T>
Variable<T> hr_generator_loss(const Variable<T>& fake_scores) {
  return scale(reduce_mean(fake_scores, kAllAxes), -1.0);
}

template <typename T>
AdversarialLosses<T> loss_adv_hr(const HrDiscriminator& disc, const ParamStore<T>& store, int active_levels,
                                 const Variable<T>& real_hr, const Variable<T>& fake_hr) {
  AdversarialLosses<T> out;
  out.d_loss = hr_discriminator_loss(disc.forward(store, detach(real_hr), active_levels),
                                     disc.forward(store, detach(fake_hr), active_levels));
  out.g_loss = hr_generator_loss(disc.forward(store, fake_hr, active_levels));
  return out;
}

template <typename T>
Variable<T> loss_rec_cycle(const Variable<T>& sr_out, const Variable<T>& clean_lr) {
  const Shape a = sr_out.shape();
  const Shape b = clean_lr.shape();
  if (a.n() != b.n() || a.c() != b.c() || b.h() == 0 || b.w() == 0 || a.h() % b.h() != 0 || a.w() % b.w() != 0) {
    throw ShapeError("cycle loss: " + a.str() + " is not an integer multiple of " + b.str());
  }
  const std::int64_t ratio = a.h() / b.h();
  if (a.w() / b.w() != ratio || ratio < 2 || !is_power_of_two(ratio)) {
    throw ShapeError("cycle loss: scale ratio must be the same power of two >= 2 on both axes, got " + a.str() +
                     " vs " + b.str());
  }
  return l1_mean(resize(sr_out, b.h(), b.w(), ResizeKind::kBicubic), clean_lr);
}

template <typename T>
Variable<T> stage2_total(const Variable<T>& adv, const Variable<T>& rec, const Variable<T>& r1,
                         const Stage2Weights& weights) {
  return add(add(adv, scale(rec, weights.rec)), scale(r1, weights.r1));
}

#define SELFSR_INSTANTIATE(T)                                                                               \
  template Variable<T> instance_normalize<T>(const Variable<T>&, double);                                  \
  template Variable<T> self_cond_norm<T>(const Variable<T>&, const Variable<T>&, double);                   \
  template void SelfCondBlock::create<T>(ParamStore<T>&, std::uint64_t) const;                             \
  template Variable<T> SelfCondBlock::gamma<T>(const ParamStore<T>&, const Variable<T>&) const;             \
  template Variable<T> SelfCondBlock::forward<T>(const ParamStore<T>&, const Variable<T>&,                 \
                                                 const Variable<T>&) const;                                \
  template void SrGenerator::init<T>(ParamStore<T>&, std::uint64_t) const;                                 \
  template void SrGenerator::init_level<T>(ParamStore<T>&, int, std::uint64_t) const;                      \
  template Variable<T> SrGenerator::forward<T>(const ParamStore<T>&, const Variable<T>&,                   \
                                               const ProgressiveState&, double) const;                     \
  template std::vector<Tensor<T>> SrGenerator::condition_features<T>(const ParamStore<T>&,                 \
                                                                     const Variable<T>&, int,              \
                                                                     const ProgressiveState&) const;       \
  template void HrDiscriminator::init<T>(ParamStore<T>&, std::uint64_t) const;                             \
  template void HrDiscriminator::init_level<T>(ParamStore<T>&, int, std::uint64_t) const;                  \
  template Variable<T> HrDiscriminator::forward<T>(const ParamStore<T>&, const Variable<T>&, int) const;   \
  template void grow<T>(ProgressiveState&, ParamStore<T>&, const SrGenerator&, const HrDiscriminator&,     \
                        std::uint64_t);                                                                    \
  template Variable<T> hr_discriminator_loss<T>(const Variable<T>&, const Variable<T>&);                   \
  template Variable<T> hr_generator_loss<T>(const Variable<T>&);                                            \
  template AdversarialLosses<T> loss_adv_hr<T>(const HrDiscriminator&, const ParamStore<T>&, int,          \
                                               const Variable<T>&, const Variable<T>&);                    \
  template Variable<T> loss_rec_cycle<T>(const Variable<T>&, const Variable<T>&);                          \
  template Variable<T> stage2_total<T>(const Variable<T>&, const Variable<T>&, const Variable<T>&,         \
                                       const Stage2Weights&);

SELFSR_INSTANTIATE(float)
SELFSR_INSTANTIATE(double)

#undef SELFSR_INSTANTIATE

}  // namespace selfsr
