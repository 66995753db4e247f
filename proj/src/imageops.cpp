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

#include "selfsr/imageops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace selfsr {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

struct ConvGeom {
  std::int64_t cin, cout, k, stride, pad, h, w, ho, wo;
  std::int64_t rows() const { return cin * k * k; }
  std::int64_t cols() const { return ho * wo; }
  bool pointwise() const { return k == 1 && stride == 1; }
};

ConvGeom geometry(const Shape& x, const Shape& w, std::int64_t stride) {
  if (w.h() != w.w() || w.h() % 2 == 0) {
    throw ShapeError("convolution kernel must be square and odd, got " + w.str());
  }
  if (x.c() != w.c()) {
    throw ShapeError("convolution input has " + std::to_string(x.c()) + " channels, weight expects " +
                     std::to_string(w.c()));
  }
  if (stride != 1 && stride != 2) throw ShapeError("convolution stride must be 1 or 2");
  ConvGeom g{x.c(), w.n(), w.h(), stride, w.h() / 2, x.h(), x.w(), 0, 0};
  g.ho = (g.h + 2 * g.pad - g.k) / stride + 1;
  g.wo = (g.w + 2 * g.pad - g.k) / stride + 1;
  if (g.ho <= 0 || g.wo <= 0) throw ShapeError("convolution output would be empty for input " + x.str());
  return g;
}

template <typename T>
void im2col(const T* x, const ConvGeom& g, T* col) {
  for (std::int64_t c = 0; c < g.cin; ++c)
    for (std::int64_t ki = 0; ki < g.k; ++ki)
      for (std::int64_t kj = 0; kj < g.k; ++kj) {
        T* row = col + ((c * g.k + ki) * g.k + kj) * g.cols();
        for (std::int64_t oh = 0; oh < g.ho; ++oh) {
          const std::int64_t ih = oh * g.stride - g.pad + ki;
          T* dst = row + oh * g.wo;
          if (ih < 0 || ih >= g.h) {
            std::fill_n(dst, g.wo, T(0));
            continue;
          }
          const T* src = x + (c * g.h + ih) * g.w;
          for (std::int64_t ow = 0; ow < g.wo; ++ow) {
            const std::int64_t iw = ow * g.stride - g.pad + kj;
            dst[ow] = (iw >= 0 && iw < g.w) ? src[iw] : T(0);
          }
        }
      }
}

template <typename T>
void col2im_add(const T* col, const ConvGeom& g, T* x) {
  for (std::int64_t c = 0; c < g.cin; ++c)
    for (std::int64_t ki = 0; ki < g.k; ++ki)
      for (std::int64_t kj = 0; kj < g.k; ++kj) {
        const T* row = col + ((c * g.k + ki) * g.k + kj) * g.cols();
        for (std::int64_t oh = 0; oh < g.ho; ++oh) {
          const std::int64_t ih = oh * g.stride - g.pad + ki;
          if (ih < 0 || ih >= g.h) continue;
          T* dst = x + (c * g.h + ih) * g.w;
          const T* src = row + oh * g.wo;
          for (std::int64_t ow = 0; ow < g.wo; ++ow) {
            const std::int64_t iw = ow * g.stride - g.pad + kj;
            if (iw >= 0 && iw < g.w) dst[iw] += src[ow];
          }
        }
      }
}

template <typename T>
Tensor<T> conv_forward(const Tensor<T>& x, const Tensor<T>& w, std::int64_t stride) {
  const ConvGeom g = geometry(x.shape(), w.shape(), stride);
  const std::int64_t n_batch = x.shape().n();
  Tensor<T> y(Shape{n_batch, g.cout, g.ho, g.wo});
  ConstMatMap<T> wm(w.ptr(), g.cout, g.rows());
  std::vector<T> col(g.pointwise() ? 0 : static_cast<std::size_t>(g.rows() * g.cols()));
  for (std::int64_t n = 0; n < n_batch; ++n) {
    const T* xn = x.ptr() + n * g.cin * g.h * g.w;
    if (!g.pointwise()) im2col(xn, g, col.data());
    ConstMatMap<T> cm(g.pointwise() ? xn : col.data(), g.rows(), g.cols());
    MatMap<T> ym(y.ptr() + n * g.cout * g.cols(), g.cout, g.cols());
    ym.noalias() = wm * cm;
  }
  return y;
}

template <typename T>
Tensor<T> conv_input_grad(const Tensor<T>& gy, const Tensor<T>& w, const Shape& x_shape,
                          std::int64_t stride) {
  const ConvGeom g = geometry(x_shape, w.shape(), stride);
  if (gy.shape() != Shape{x_shape.n(), g.cout, g.ho, g.wo}) {
    throw ShapeError("conv input-gradient: upstream " + gy.shape().str() + " inconsistent with input " +
                     x_shape.str());
  }
  Tensor<T> dx(x_shape);
  ConstMatMap<T> wm(w.ptr(), g.cout, g.rows());
  RowMat<T> col(g.rows(), g.cols());
  for (std::int64_t n = 0; n < x_shape.n(); ++n) {
    ConstMatMap<T> gm(gy.ptr() + n * g.cout * g.cols(), g.cout, g.cols());
    T* dxn = dx.ptr() + n * g.cin * g.h * g.w;
    if (g.pointwise()) {
      MatMap<T> dm(dxn, g.rows(), g.cols());
      dm.noalias() = wm.transpose() * gm;
    } else {
      col.noalias() = wm.transpose() * gm;
      col2im_add(col.data(), g, dxn);
    }
  }
  return dx;
}

template <typename T>
Tensor<T> conv_weight_grad(const Tensor<T>& x, const Tensor<T>& gy, const Shape& w_shape,
                           std::int64_t stride) {
  const ConvGeom g = geometry(x.shape(), w_shape, stride);
  if (gy.shape() != Shape{x.shape().n(), g.cout, g.ho, g.wo}) {
    throw ShapeError("conv weight-gradient: upstream " + gy.shape().str() + " inconsistent with input " +
                     x.shape().str());
  }
  Tensor<T> dw(w_shape);
  MatMap<T> dm(dw.ptr(), g.cout, g.rows());
  std::vector<T> col(g.pointwise() ? 0 : static_cast<std::size_t>(g.rows() * g.cols()));
  for (std::int64_t n = 0; n < x.shape().n(); ++n) {
    const T* xn = x.ptr() + n * g.cin * g.h * g.w;
    if (!g.pointwise()) im2col(xn, g, col.data());
    ConstMatMap<T> cm(g.pointwise() ? xn : col.data(), g.rows(), g.cols());
    ConstMatMap<T> gm(gy.ptr() + n * g.cout * g.cols(), g.cout, g.cols());
    dm.noalias() += gm * cm.transpose();
  }
  return dw;
}

// ---------------------------------------------------------------------------
// Separable resampling.

struct Tap {
  std::int64_t src;
  double weight;
};
using AxisTaps = std::vector<std::vector<Tap>>;

std::int64_t clamp_index(std::int64_t i, std::int64_t n) { return std::clamp<std::int64_t>(i, 0, n - 1); }

AxisTaps axis_taps(std::int64_t in, std::int64_t out, ResizeKind kind) {
  AxisTaps taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::int64_t d = 0; d < out; ++d) {
    auto& t = taps[static_cast<std::size_t>(d)];
    const double s = (static_cast<double>(d) + 0.5) * scale - 0.5;
    switch (kind) {
      case ResizeKind::kNearest: {
        const auto idx = static_cast<std::int64_t>(std::floor((static_cast<double>(d) + 0.5) * scale));
        t.push_back({clamp_index(idx, in), 1.0});
        break;
      }
      case ResizeKind::kBilinear: {
        const double f0 = std::floor(s);
        const auto i0 = static_cast<std::int64_t>(f0);
        const double f = s - f0;
        t.push_back({clamp_index(i0, in), 1.0 - f});
        t.push_back({clamp_index(i0 + 1, in), f});
        break;
      }
      case ResizeKind::kBicubic: {
        const double f0 = std::floor(s);
        const auto i0 = static_cast<std::int64_t>(f0);
        for (std::int64_t m = -1; m <= 2; ++m) {
          t.push_back({clamp_index(i0 + m, in), keys_cubic(s - static_cast<double>(i0 + m))});
        }
        break;
      }
    }
  }
  return taps;
}

// Applies taps along W (along_w) or H. `transpose` scatters instead.
template <typename T>
Tensor<T> apply_taps(const Tensor<T>& x, const AxisTaps& taps, bool along_w, std::int64_t out_extent,
                     bool transpose) {
  const Shape s = x.shape();
  Shape os = s;
  os.dims[along_w ? 3 : 2] = out_extent;
  Tensor<T> y(os);
  const std::int64_t planes = s.n() * s.c();
  for (std::int64_t p = 0; p < planes; ++p) {
    const T* xp = x.ptr() + p * s.h() * s.w();
    T* yp = y.ptr() + p * os.h() * os.w();
    if (along_w) {
      for (std::int64_t h = 0; h < s.h(); ++h) {
        const T* xr = xp + h * s.w();
        T* yr = yp + h * os.w();
        if (!transpose) {
          for (std::size_t d = 0; d < taps.size(); ++d) {
            double acc = 0.0;
            for (const Tap& t : taps[d]) acc += t.weight * xr[t.src];
            yr[d] = static_cast<T>(acc);
          }
        } else {
          for (std::size_t d = 0; d < taps.size(); ++d) {
            for (const Tap& t : taps[d]) yr[t.src] += static_cast<T>(t.weight * xr[d]);
          }
        }
      }
    } else {
      for (std::size_t d = 0; d < taps.size(); ++d) {
        for (const Tap& t : taps[d]) {
          const T wgt = static_cast<T>(t.weight);
          if (!transpose) {
            T* yr = yp + static_cast<std::int64_t>(d) * os.w();
            const T* xr = xp + t.src * s.w();
            for (std::int64_t w = 0; w < s.w(); ++w) yr[w] += wgt * xr[w];
          } else {
            T* yr = yp + t.src * os.w();
            const T* xr = xp + static_cast<std::int64_t>(d) * s.w();
            for (std::int64_t w = 0; w < s.w(); ++w) yr[w] += wgt * xr[w];
          }
        }
      }
    }
  }
  return y;
}

// ---------------------------------------------------------------------------
// Flow warp.

struct BilinearSite {
  std::int64_t x0, x1, y0, y1;
  double fx, fy;
  double dxs, dys;  // d(sample coordinate)/d(flow component): -1 inside, 0 when clamped
};

BilinearSite bilinear_site(double xs, double ys, std::int64_t w, std::int64_t h) {
  BilinearSite s{};
  const double max_x = static_cast<double>(w - 1);
  const double max_y = static_cast<double>(h - 1);
  s.dxs = (xs > 0.0 && xs < max_x) ? -1.0 : 0.0;
  s.dys = (ys > 0.0 && ys < max_y) ? -1.0 : 0.0;
  xs = std::clamp(xs, 0.0, max_x);
  ys = std::clamp(ys, 0.0, max_y);
  const double fx0 = std::floor(xs);
  const double fy0 = std::floor(ys);
  s.x0 = static_cast<std::int64_t>(fx0);
  s.y0 = static_cast<std::int64_t>(fy0);
  s.x1 = std::min(s.x0 + 1, w - 1);
  s.y1 = std::min(s.y0 + 1, h - 1);
  s.fx = xs - fx0;
  s.fy = ys - fy0;
  return s;
}

template <typename T>
void check_flow(const Shape& img, const Shape& flow) {
  if (flow != Shape{img.n(), 2, img.h(), img.w()}) {
    throw ShapeError("flow " + flow.str() + " does not match image " + img.str());
  }
}

template <typename T>
Tensor<T> warp_forward(const Tensor<T>& img, const Tensor<T>& flow) {
  const Shape s = img.shape();
  Tensor<T> out(s);
  for (std::int64_t n = 0; n < s.n(); ++n)
    for (std::int64_t y = 0; y < s.h(); ++y)
      for (std::int64_t x = 0; x < s.w(); ++x) {
        const double xs = static_cast<double>(x) - flow.at(n, 0, y, x);
        const double ys = static_cast<double>(y) - flow.at(n, 1, y, x);
        const BilinearSite b = bilinear_site(xs, ys, s.w(), s.h());
        for (std::int64_t c = 0; c < s.c(); ++c) {
          const double top = (1.0 - b.fx) * img.at(n, c, b.y0, b.x0) + b.fx * img.at(n, c, b.y0, b.x1);
          const double bot = (1.0 - b.fx) * img.at(n, c, b.y1, b.x0) + b.fx * img.at(n, c, b.y1, b.x1);
          out.at(n, c, y, x) = static_cast<T>((1.0 - b.fy) * top + b.fy * bot);
        }
      }
  return out;
}

template <typename T>
void warp_backward(const Tensor<T>& img, const Tensor<T>& flow, const Tensor<T>& g, Tensor<T>* gimg,
                   Tensor<T>* gflow) {
  const Shape s = img.shape();
  for (std::int64_t n = 0; n < s.n(); ++n)
    for (std::int64_t y = 0; y < s.h(); ++y)
      for (std::int64_t x = 0; x < s.w(); ++x) {
        const double xs = static_cast<double>(x) - flow.at(n, 0, y, x);
        const double ys = static_cast<double>(y) - flow.at(n, 1, y, x);
        const BilinearSite b = bilinear_site(xs, ys, s.w(), s.h());
        double dflow_x = 0.0, dflow_y = 0.0;
        for (std::int64_t c = 0; c < s.c(); ++c) {
          const double go = g.at(n, c, y, x);
          if (gimg) {
            gimg->at(n, c, b.y0, b.x0) += static_cast<T>(go * (1.0 - b.fx) * (1.0 - b.fy));
            gimg->at(n, c, b.y0, b.x1) += static_cast<T>(go * b.fx * (1.0 - b.fy));
            gimg->at(n, c, b.y1, b.x0) += static_cast<T>(go * (1.0 - b.fx) * b.fy);
            gimg->at(n, c, b.y1, b.x1) += static_cast<T>(go * b.fx * b.fy);
          }
          if (gflow) {
            const double v00 = img.at(n, c, b.y0, b.x0), v01 = img.at(n, c, b.y0, b.x1);
            const double v10 = img.at(n, c, b.y1, b.x0), v11 = img.at(n, c, b.y1, b.x1);
            const double d_xs = (1.0 - b.fy) * (v01 - v00) + b.fy * (v11 - v10);
            const double d_ys = (1.0 - b.fx) * (v10 - v00) + b.fx * (v11 - v01);
            dflow_x += go * d_xs * b.dxs;
            dflow_y += go * d_ys * b.dys;
          }
        }
        if (gflow) {
          gflow->at(n, 0, y, x) += static_cast<T>(dflow_x);
          gflow->at(n, 1, y, x) += static_cast<T>(dflow_y);
        }
      }
}

}  // namespace

void ConvSpec::validate() const {
  if (in_ch <= 0 || out_ch <= 0) throw ShapeError("convolution channel counts must be positive");
  if (kernel <= 0 || kernel % 2 == 0) throw ShapeError("convolution kernel size must be odd");
  if (stride != 1 && stride != 2) throw ShapeError("convolution stride must be 1 or 2");
}

double keys_cubic(double t) {
  constexpr double a = -0.5;
  const double x = std::abs(t);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

template <typename T>
Variable<T> conv2d_nobias(const Variable<T>& x, const Variable<T>& w, std::int64_t stride) {
  return record<T>(
      "conv2d", conv_forward(x.value(), w.value(), stride), {x, w},
      [x, w, stride](const Variable<T>& g) -> std::vector<Variable<T>> {
        Variable<T> gx, gw;
        if (x.requires_grad()) gx = conv2d_input_grad(g, w, x.shape(), stride);
        if (w.requires_grad()) gw = conv2d_weight_grad(x, g, w.shape(), stride);
        return {gx, gw};
      },
      true);
}

template <typename T>
Variable<T> conv2d_input_grad(const Variable<T>& g, const Variable<T>& w, const Shape& x_shape,
                              std::int64_t stride) {
  return record<T>(
      "conv2d_input_grad", conv_input_grad(g.value(), w.value(), x_shape, stride), {g, w},
      [g, w, stride](const Variable<T>& gz) -> std::vector<Variable<T>> {
        Variable<T> gg, gw;
        if (g.requires_grad()) gg = conv2d_nobias(gz, w, stride);
        if (w.requires_grad()) gw = conv2d_weight_grad(gz, g, w.shape(), stride);
        return {gg, gw};
      },
      true);
}

template <typename T>
Variable<T> conv2d_weight_grad(const Variable<T>& x, const Variable<T>& g, const Shape& w_shape,
                               std::int64_t stride) {
  return record<T>(
      "conv2d_weight_grad", conv_weight_grad(x.value(), g.value(), w_shape, stride), {x, g},
      [x, g, stride](const Variable<T>& gz) -> std::vector<Variable<T>> {
        Variable<T> gx, gg;
        if (x.requires_grad()) gx = conv2d_input_grad(g, gz, x.shape(), stride);
        if (g.requires_grad()) gg = conv2d_nobias(x, gz, stride);
        return {gx, gg};
      },
      true);
}

template <typename T>
Variable<T> conv2d(const Variable<T>& x, const Variable<T>& w, const Variable<T>& b, const ConvSpec& spec) {
  spec.validate();
  if (w.shape() != Shape{spec.out_ch, spec.in_ch, spec.kernel, spec.kernel}) {
    throw ShapeError("conv2d weight " + w.shape().str() + " does not match the ConvSpec");
  }
  if (b.shape() != Shape{1, spec.out_ch, 1, 1}) {
    throw ShapeError("conv2d bias " + b.shape().str() + " does not match the ConvSpec");
  }
  if (x.shape().c() != spec.in_ch) {
    throw ShapeError("conv2d input " + x.shape().str() + " has the wrong channel count for the ConvSpec");
  }
  return add(conv2d_nobias(x, w, spec.stride), b);
}

template <typename T>
Variable<T> resize(const Variable<T>& x, std::int64_t out_h, std::int64_t out_w, ResizeKind kind) {
  if (out_h <= 0 || out_w <= 0) throw ShapeError("resize target must be positive");
  const Shape in = x.shape();
  auto taps_w = std::make_shared<AxisTaps>(axis_taps(in.w(), out_w, kind));
  auto taps_h = std::make_shared<AxisTaps>(axis_taps(in.h(), out_h, kind));
  Tensor<T> y = apply_taps(apply_taps(x.value(), *taps_w, true, out_w, false), *taps_h, false, out_h, false);
  return record<T>(
      "resize", std::move(y), {x},
      [in, taps_w, taps_h](const Variable<T>& g) -> std::vector<Variable<T>> {
        Tensor<T> gh = apply_taps(g.value(), *taps_h, false, in.h(), true);
        return {constant(apply_taps(gh, *taps_w, true, in.w(), true))};
      },
      false);
}

template <typename T>
Variable<T> grid_sample(const Variable<T>& img, const Variable<T>& flow, const SamplingKernelConfig&) {
  check_flow<T>(img.shape(), flow.shape());
  return record<T>(
      "grid_sample", warp_forward(img.value(), flow.value()), {img, flow},
      [img, flow](const Variable<T>& g) -> std::vector<Variable<T>> {
        Tensor<T> gimg(img.shape());
        Tensor<T> gflow(flow.shape());
        warp_backward(img.value(), flow.value(), g.value(), img.requires_grad() ? &gimg : nullptr,
                      flow.requires_grad() ? &gflow : nullptr);
        return {constant(std::move(gimg)), constant(std::move(gflow))};
      },
      false);
}

template <typename T>
Variable<T> forward_diff(const Variable<T>& a, Axis axis) {
  if (axis != kAxisH && axis != kAxisW) throw ShapeError("forward_diff axis must be H or W");
  const Shape s = a.shape();
  const bool along_w = axis == kAxisW;
  if ((along_w ? s.w() : s.h()) < 2) throw ShapeError("forward_diff needs at least two samples");
  Shape os = s;
  os.dims[along_w ? 3 : 2] -= 1;
  Tensor<T> out(os);
  const Tensor<T>& v = a.value();
  for (std::int64_t n = 0; n < os.n(); ++n)
    for (std::int64_t c = 0; c < os.c(); ++c)
      for (std::int64_t h = 0; h < os.h(); ++h)
        for (std::int64_t w = 0; w < os.w(); ++w) {
          out.at(n, c, h, w) = along_w ? v.at(n, c, h, w + 1) - v.at(n, c, h, w)
                                       : v.at(n, c, h + 1, w) - v.at(n, c, h, w);
        }
  return record<T>(
      "forward_diff", std::move(out), {a},
      [s, os, along_w](const Variable<T>& g) -> std::vector<Variable<T>> {
        Tensor<T> ga(s);
        const Tensor<T>& gv = g.value();
        for (std::int64_t n = 0; n < os.n(); ++n)
          for (std::int64_t c = 0; c < os.c(); ++c)
            for (std::int64_t h = 0; h < os.h(); ++h)
              for (std::int64_t w = 0; w < os.w(); ++w) {
                const T d = gv.at(n, c, h, w);
                ga.at(n, c, h, w) -= d;
                if (along_w) {
                  ga.at(n, c, h, w + 1) += d;
                } else {
                  ga.at(n, c, h + 1, w) += d;
                }
              }
        return {constant(std::move(ga))};
      },
      false);
}

template <typename T>
Tensor<T> rgb_to_y(const Tensor<T>& img) {
  const Shape s = img.shape();
  if (s.c() != 3) throw ShapeError("rgb_to_y expects 3 channels, got " + std::to_string(s.c()));
  Tensor<T> y(Shape{s.n(), 1, s.h(), s.w()});
  for (std::int64_t n = 0; n < s.n(); ++n)
    for (std::int64_t h = 0; h < s.h(); ++h)
      for (std::int64_t w = 0; w < s.w(); ++w) {
        const double r = img.at(n, 0, h, w), g = img.at(n, 1, h, w), b = img.at(n, 2, h, w);
        y.at(n, 0, h, w) = static_cast<T>(16.0 / 255.0 + (65.481 * r + 128.553 * g + 24.966 * b) / 255.0);
      }
  return y;
}

template <typename T>
Tensor<T> hflip(const Tensor<T>& img) {
  const Shape s = img.shape();
  Tensor<T> out(s);
  for (std::int64_t n = 0; n < s.n(); ++n)
    for (std::int64_t c = 0; c < s.c(); ++c)
      for (std::int64_t h = 0; h < s.h(); ++h)
        for (std::int64_t w = 0; w < s.w(); ++w) out.at(n, c, h, s.w() - 1 - w) = img.at(n, c, h, w);
  return out;
}

#define SELFSR_INSTANTIATE(T)                                                                        \
  template Variable<T> conv2d<T>(const Variable<T>&, const Variable<T>&, const Variable<T>&,         \
                                 const ConvSpec&);                                                   \
  template Variable<T> conv2d_nobias<T>(const Variable<T>&, const Variable<T>&, std::int64_t);       \
  template Variable<T> conv2d_input_grad<T>(const Variable<T>&, const Variable<T>&, const Shape&,    \
                                            std::int64_t);                                           \
  template Variable<T> conv2d_weight_grad<T>(const Variable<T>&, const Variable<T>&, const Shape&,   \
                                             std::int64_t);                                          \
  template Variable<T> resize<T>(const Variable<T>&, std::int64_t, std::int64_t, ResizeKind);        \
  template Variable<T> grid_sample<T>(const Variable<T>&, const Variable<T>&,                        \
                                      const SamplingKernelConfig&);                                  \
  template Variable<T> forward_diff<T>(const Variable<T>&, Axis);                                    \
  template Tensor<T> rgb_to_y<T>(const Tensor<T>&);                                                  \
  template Tensor<T> hflip<T>(const Tensor<T>&);

SELFSR_INSTANTIATE(float)
SELFSR_INSTANTIATE(double)

#undef SELFSR_INSTANTIATE

}  // namespace selfsr
