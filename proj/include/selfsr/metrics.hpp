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

#ifndef SELFSR_METRICS_HPP_
#define SELFSR_METRICS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "selfsr/tensor.hpp"

namespace selfsr {

struct MetricOptions {
  int crop_border = 0;  // pixels dropped from every side before measuring
};

/// PSNR in dB between the Y channels of two RGB images in [0, 1] (any leading
/// batch of 1). Identical Y channels give +infinity.
double psnr_y(const Tensor<double>& a, const Tensor<double>& b, const MetricOptions& opts = {});

/// Single-scale SSIM on Y: 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2, averaged over window positions fully inside the image.
double ssim_y(const Tensor<double>& a, const Tensor<double>& b, const MetricOptions& opts = {});

/// SSIM between two single-channel maps in [0, 1].
double ssim_gray(const Tensor<double>& a, const Tensor<double>& b);

struct MetricRow {
  std::string id;
  double psnr_db = 0;
  double ssim = 0;
};

struct MetricReport {
  std::vector<MetricRow> per_image;
  double mean_psnr = 0;   // over finite rows only
  double mean_ssim = 0;
  std::int64_t count = 0;
  std::int64_t infinite_psnr = 0;
  std::vector<std::string> warnings;

  void add(MetricRow row);
  /// Recomputes the aggregates from per_image.
  void finalize();
  std::string to_tsv() const;
  std::string to_json() const;
};

/// PSNR formatted for reports; +infinity is written as "inf".
std::string format_psnr(double db);

}  // namespace selfsr

#endif  // SELFSR_METRICS_HPP_
