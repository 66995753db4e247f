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

#ifndef SELFSR_SRNET_HPP_
#define SELFSR_SRNET_HPP_

#include <cstdint>
#include <vector>

#include "selfsr/degradation.hpp"
#include "selfsr/params.hpp"

namespace selfsr {

struct SRNetConfig {
  std::int64_t base_width = 16;
  std::int64_t min_width = 4;
  int blocks_per_level = 2;
  int final_scale = 4;  // power of two >= 2
  double eps = 1e-5;

  int num_levels() const;
  /// Channel width at `level` (1-based); halves per level down to min_width.
  std::int64_t width(int level) const;
  void validate() const;
};

/// Progressive schedule: the network starts at x2 and gains one x2 level at
/// each grow step until final_scale.
struct ProgressiveState {
  int active_levels = 1;
  std::vector<std::int64_t> grow_steps;
  int final_scale = 4;

  int scale() const { return 1 << active_levels; }
  int max_levels() const;
  bool at_final() const { return scale() >= final_scale; }
};

/// (f - mu) / sqrt(var + eps) with statistics per (sample, channel) over the
/// spatial extent.
template <typename T>
Variable<T> instance_normalize(const Variable<T>& f, double eps);

/// gamma * instance_normalize(f). There is no additive term.
template <typename T>
Variable<T> self_cond_norm(const Variable<T>& f, const Variable<T>& gamma, double eps);

/// One self-conditioned block: a 3x3 conv whose output is normalized and
/// modulated by gamma = cond1(leaky_relu(cond0(condition image))).
struct SelfCondBlock {
  ConvLayer main;
  ConvLayer cond0;
  ConvLayer cond1;
  double eps = 1e-5;

  template <typename T>
  void create(ParamStore<T>& store, std::uint64_t seed) const;
  template <typename T>
  Variable<T> gamma(const ParamStore<T>& store, const Variable<T>& cond_img) const;
  /// `cond_img` must already be at x's spatial size.
  template <typename T>
  Variable<T> forward(const ParamStore<T>& store, const Variable<T>& x, const Variable<T>& cond_img) const;
};

/// Progressive self-conditioned generator. Every level: nearest x2 upsample,
/// blocks_per_level self-conditioned blocks fed the LR input resized to the
/// level's resolution, and a 1x1 toRGB head.
class SrGenerator {
 public:
  explicit SrGenerator(SRNetConfig cfg = {});

  const SRNetConfig& config() const { return cfg_; }

  /// Creates the stem and level 1.
  template <typename T>
  void init(ParamStore<T>& store, std::uint64_t seed) const;
  template <typename T>
  void init_level(ParamStore<T>& store, int level, std::uint64_t seed) const;

  /// Output at scale 2^active_levels. With fade_alpha < 1 the newest toRGB is
  /// blended with the upsampled output of the previous level.
  template <typename T>
  Variable<T> forward(const ParamStore<T>& store, const Variable<T>& lr_img, const ProgressiveState& state,
                      double fade_alpha = 1.0) const;

  /// Per-channel min-max normalized gamma maps of the first block at `level`
  /// for sample 0, each (1, 1, H, W) in [0, 1].
  template <typename T>
  std::vector<Tensor<T>> condition_features(const ParamStore<T>& store, const Variable<T>& lr_img,
                                            int level, const ProgressiveState& state) const;

  /// Convolution layers owned by one level (identical for every level).
  int conv_layers_per_level(int level) const;

  static constexpr const char* kPrefix = "G.";

 private:
  const std::vector<SelfCondBlock>& blocks(int level) const { return blocks_[level - 1]; }

  SRNetConfig cfg_;
  ConvLayer stem_;
  std::vector<std::vector<SelfCondBlock>> blocks_;
  std::vector<ConvLayer> to_rgb_;
};

/// Stride-2 conv stack mirroring the generator: fromRGB at the active
/// resolution, one stride-2 block per active level, then a head at the LR
/// resolution producing one raw score per sample (n, 1, 1, 1). Uses only
/// second-order capable ops.
class HrDiscriminator {
 public:
  explicit HrDiscriminator(SRNetConfig cfg = {});

  template <typename T>
  void init(ParamStore<T>& store, std::uint64_t seed) const;
  template <typename T>
  void init_level(ParamStore<T>& store, int level, std::uint64_t seed) const;
  template <typename T>
  Variable<T> forward(const ParamStore<T>& store, const Variable<T>& x, int active_levels) const;

  static constexpr const char* kPrefix = "D.";

 private:
  SRNetConfig cfg_;
  std::vector<ConvLayer> from_rgb_;
  std::vector<ConvLayer> down_;
  ConvLayer head_conv_;
  ConvLayer head_score_;
};

/// Appends one level to generator and discriminator. Existing parameters are
/// left untouched. Throws when already at final scale.
template <typename T>
void grow(ProgressiveState& state, ParamStore<T>& store, const SrGenerator& gen, const HrDiscriminator& disc,
          std::uint64_t seed);

/// Hinge terms: d = E relu(1 - D(real)) + E relu(1 + D(fake)), g = -E D(fake).
template <typename T>
Variable<T> hr_discriminator_loss(const Variable<T>& real_scores, const Variable<T>& fake_scores);
template <typename T>
Variable<T> hr_generator_loss(const Variable<T>& fake_scores);

template <typename T>
AdversarialLosses<T> loss_adv_hr(const HrDiscriminator& disc, const ParamStore<T>& store, int active_levels,
                                 const Variable<T>& real_hr, const Variable<T>& fake_hr);

template <typename T>
Variable<T> loss_rec(const Variable<T>& real_hr, const Variable<T>& gen_hr) {
  return l1_mean(real_hr, gen_hr);
}

/// mean |bicubic_down(sr_out) - clean_lr|. The size ratio must be the same
/// power of two (>= 2) on both axes.
template <typename T>
Variable<T> loss_rec_cycle(const Variable<T>& sr_out, const Variable<T>& clean_lr);

/// (r / 2) E ||grad_x D(x)||^2 on real samples, built with a second-order
/// tape so its parameter gradients come from double backprop. `disc` maps a
/// batch to per-sample scores.
template <typename T, typename Disc>
Variable<T> loss_r1(Disc&& disc, const Tensor<T>& real, double r = 10.0) {
  Variable<T> x(real, true);
  Variable<T> scores = disc(x);
  Variable<T> gx = grad(reduce_sum(scores, kAllAxes), {x}, true)[0];
  Variable<T> per_sample = reduce_sum(square(gx), kAxesCHW);
  return scale(reduce_mean(per_sample, kAllAxes), r / 2.0);
}

struct Stage2Weights {
  double rec = 150.0;
  double r1 = 3.0;
};

template <typename T>
Variable<T> stage2_total(const Variable<T>& adv, const Variable<T>& rec, const Variable<T>& r1,
                         const Stage2Weights& weights = {});

}  // namespace selfsr

#endif  // SELFSR_SRNET_HPP_
