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

#ifndef SELFSR_IMAGEOPS_HPP_
#define SELFSR_IMAGEOPS_HPP_

#include <cstdint>

#include "selfsr/autodiff.hpp"

namespace selfsr {

/// Geometry of a square convolution. Weights are stored as
/// (out_ch, in_ch, kernel, kernel) tensors, biases as (1, out_ch, 1, 1).
struct ConvSpec {
  std::int64_t in_ch = 1;
  std::int64_t out_ch = 1;
  std::int64_t kernel = 3;
  std::int64_t stride = 1;

  std::int64_t pad() const { return kernel / 2; }
  std::int64_t out_extent(std::int64_t in) const { return (in + 2 * pad() - kernel) / stride + 1; }
  std::int64_t fan_in() const { return in_ch * kernel * kernel; }
  void validate() const;
};

/// Cross-correlation plus bias. Fully second-order differentiable in x, w and b.
template <typename T>
Variable<T> conv2d(const Variable<T>& x, const Variable<T>& w, const Variable<T>& b, const ConvSpec& spec);

/// Bias-free cross-correlation and its two adjoints. The three ops are closed
/// under differentiation, which is what makes double backprop through a
/// convolution stack possible.
template <typename T>
Variable<T> conv2d_nobias(const Variable<T>& x, const Variable<T>& w, std::int64_t stride);
template <typename T>
Variable<T> conv2d_input_grad(const Variable<T>& g, const Variable<T>& w, const Shape& x_shape,
                              std::int64_t stride);
template <typename T>
Variable<T> conv2d_weight_grad(const Variable<T>& x, const Variable<T>& g, const Shape& w_shape,
                               std::int64_t stride);

enum class ResizeKind { kNearest, kBilinear, kBicubic };

/// Separable resampling with half-pixel centres and clamp-to-edge borders.
/// Bicubic uses the Keys kernel with a = -0.5. First-order differentiable.
template <typename T>
Variable<T> resize(const Variable<T>& x, std::int64_t out_h, std::int64_t out_w, ResizeKind kind);

/// Continuous Keys cubic kernel (a = -0.5).
double keys_cubic(double t);

/// Sampling kernel used by the flow warp. Only bilinear with clamp-to-edge
/// borders is implemented.
struct SamplingKernelConfig {
  enum class Kind { kBilinear } kind = Kind::kBilinear;
  enum class Border { kClampToEdge } border = Border::kClampToEdge;
};

/// Warps `img` by a pixel-unit flow (n, 2, h, w): output (x, y) reads the
/// source at (x - dx, y - dy), channel 0 = dx, channel 1 = dy.
/// Differentiable (first order) in both img and flow.
template <typename T>
Variable<T> grid_sample(const Variable<T>& img, const Variable<T>& flow,
                        const SamplingKernelConfig& cfg = {});

/// Forward differences along H (axis = kAxisH) or W (axis = kAxisW); the
/// result is one element shorter on that axis.
template <typename T>
Variable<T> forward_diff(const Variable<T>& a, Axis axis);

/// Luma of a 3-channel image in [0, 1]:
/// Y = 16/255 + (65.481 R + 128.553 G + 24.966 B) / 255.
template <typename T>
Tensor<T> rgb_to_y(const Tensor<T>& img);

/// Mirrors every sample along the width axis.
template <typename T>
Tensor<T> hflip(const Tensor<T>& img);

}  // namespace selfsr

#endif  // SELFSR_IMAGEOPS_HPP_
