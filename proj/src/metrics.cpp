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

#include "selfsr/metrics.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "selfsr/error.hpp"
#include "selfsr/imageops.hpp"

namespace selfsr {
namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

Tensor<double> luma(const Tensor<double>& img, const MetricOptions& opts) {
  const Shape& s = img.shape();
  if (s.n() != 1 || s.c() != 3) throw ShapeError("metrics expect a single RGB image, got " + s.str());
  Tensor<double> y = rgb_to_y(img);
  const std::int64_t b = opts.crop_border;
  if (b == 0) return y;
  if (2 * b >= s.h() || 2 * b >= s.w()) throw ShapeError("crop_border removes the whole image");
  Tensor<double> out(Shape{1, 1, s.h() - 2 * b, s.w() - 2 * b});
  for (std::int64_t r = 0; r < out.shape().h(); ++r) {
    for (std::int64_t c = 0; c < out.shape().w(); ++c) out.at(0, 0, r, c) = y.at(0, 0, r + b, c + b);
  }
  return out;
}

void require_same(const Tensor<double>& a, const Tensor<double>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("metric inputs differ in shape: " + a.shape().str() + " vs " + b.shape().str());
  }
}

std::array<double, kWindow> gaussian_window() {
  std::array<double, kWindow> g{};
  double sum = 0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    g[i] = std::exp(-d * d / (2 * kSigma * kSigma));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// Separable Gaussian filter over valid positions of an (h, w) plane.
std::vector<double> filter_valid(const std::vector<double>& x, std::int64_t h, std::int64_t w) {
  static const auto g = gaussian_window();
  const std::int64_t oh = h - kWindow + 1, ow = w - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h * ow));
  for (std::int64_t r = 0; r < h; ++r) {
    for (std::int64_t c = 0; c < ow; ++c) {
      double acc = 0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * x[r * w + c + k];
      rows[r * ow + c] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh * ow));
  for (std::int64_t r = 0; r < oh; ++r) {
    for (std::int64_t c = 0; c < ow; ++c) {
      double acc = 0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * rows[(r + k) * ow + c];
      out[r * ow + c] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr_y(const Tensor<double>& a, const Tensor<double>& b, const MetricOptions& opts) {
  require_same(a, b);
  const Tensor<double> ya = luma(a, opts), yb = luma(b, opts);
  double sse = 0;
  for (std::int64_t i = 0; i < ya.numel(); ++i) {
    const double d = ya[i] - yb[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(ya.numel());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim_gray(const Tensor<double>& a, const Tensor<double>& b) {
  require_same(a, b);
  const std::int64_t h = a.shape().h(), w = a.shape().w();
  if (a.numel() != h * w) throw ShapeError("ssim_gray expects a single channel, got " + a.shape().str());
  if (h < kWindow || w < kWindow) {
    throw ShapeError("SSIM needs images of at least 11x11, got " + std::to_string(h) + "x" + std::to_string(w));
  }
  const auto n = static_cast<std::size_t>(h * w);
  std::vector<double> xa(a.data().begin(), a.data().end()), xb(b.data().begin(), b.data().end());
  std::vector<double> aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    aa[i] = xa[i] * xa[i];
    bb[i] = xb[i] * xb[i];
    ab[i] = xa[i] * xb[i];
  }
  const auto mu_a = filter_valid(xa, h, w), mu_b = filter_valid(xb, h, w);
  const auto e_aa = filter_valid(aa, h, w), e_bb = filter_valid(bb, h, w), e_ab = filter_valid(ab, h, w);
  double total = 0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = e_aa[i] - ma * ma, vb = e_bb[i] - mb * mb, cov = e_ab[i] - ma * mb;
    total += ((2 * ma * mb + kC1) * (2 * cov + kC2)) / ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
  }
  return total / static_cast<double>(mu_a.size());
}

double ssim_y(const Tensor<double>& a, const Tensor<double>& b, const MetricOptions& opts) {
  require_same(a, b);
  return ssim_gray(luma(a, opts), luma(b, opts));
}

std::string format_psnr(double db) {
  if (std::isinf(db)) return "inf";
  std::ostringstream os;
  os << std::setprecision(10) << db;
  return os.str();
}

void MetricReport::add(MetricRow row) { per_image.push_back(std::move(row)); }

void MetricReport::finalize() {
  count = static_cast<std::int64_t>(per_image.size());
  infinite_psnr = 0;
  warnings.clear();
  double psnr_sum = 0, ssim_sum = 0;
  for (const auto& row : per_image) {
    ssim_sum += row.ssim;
    if (std::isinf(row.psnr_db)) {
      ++infinite_psnr;
    } else {
      psnr_sum += row.psnr_db;
    }
  }
  mean_ssim = count > 0 ? ssim_sum / static_cast<double>(count) : 0.0;
  const auto finite = count - infinite_psnr;
  if (finite > 0) {
    mean_psnr = psnr_sum / static_cast<double>(finite);
  } else {
    mean_psnr = count > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  if (infinite_psnr > 0) {
    warnings.push_back(std::to_string(infinite_psnr) +
                       " image(s) identical to ground truth (PSNR inf) excluded from the PSNR mean");
  }
}

std::string MetricReport::to_tsv() const {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "id\tpsnr_db\tssim\n";
  for (const auto& row : per_image) os << row.id << '\t' << format_psnr(row.psnr_db) << '\t' << row.ssim << '\n';
  os << "mean\t" << format_psnr(mean_psnr) << '\t' << mean_ssim << '\n';
  return os.str();
}

std::string MetricReport::to_json() const {
  auto psnr_json = [](double db) { return std::isinf(db) ? nlohmann::json("inf") : nlohmann::json(db); };
  nlohmann::json doc;
  doc["per_image"] = nlohmann::json::array();
  for (const auto& row : per_image) {
    doc["per_image"].push_back({{"id", row.id}, {"psnr_db", psnr_json(row.psnr_db)}, {"ssim", row.ssim}});
  }
  doc["aggregate"] = {{"mean_psnr_db", psnr_json(mean_psnr)}, {"mean_ssim", mean_ssim}};
  doc["count"] = count;
  doc["warnings"] = warnings;
  return doc.dump(2) + "\n";
}

}  // namespace selfsr
