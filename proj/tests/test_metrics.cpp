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

#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "selfsr/error.hpp"
#include "selfsr/metrics.hpp"

using namespace selfsr;

namespace {

Tensor<double> random_image(std::int64_t h, std::int64_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return oracle::random_tensor(Shape{1, 3, h, w}, rng, 0.1, 0.9);
}

Tensor<double> plus(const Tensor<double>& a, double c) {
  Tensor<double> b = a;
  for (auto& v : b.data()) v += c;
  return b;
}

}  // namespace

TEST_CASE("identical images") {
  const auto a = random_image(16, 20, 1);
  CHECK(std::isinf(psnr_y(a, a)));
  CHECK(psnr_y(a, a) > 0);
  CHECK(ssim_y(a, a) == 1.0);
}

TEST_CASE("PSNR at a known luma MSE") {
  // Adding d to every RGB channel moves Y by d * 219 / 255.
  const auto a = random_image(12, 12, 2);
  const double dy = std::sqrt(1e-3);
  const auto b = plus(a, dy * 255.0 / 219.0);
  CHECK(std::abs(psnr_y(a, b) - 30.0) <= 1e-9);
}

TEST_CASE("symmetry") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto a = random_image(15, 13, seed), b = random_image(15, 13, seed + 50);
    CHECK(std::abs(psnr_y(a, b) - psnr_y(b, a)) <= 1e-12);
    CHECK(std::abs(ssim_y(a, b) - ssim_y(b, a)) <= 1e-12);
  }
}

TEST_CASE("PSNR decreases as noise grows") {
  const auto a = random_image(16, 16, 3);
  std::mt19937_64 rng(4);
  const auto noise = oracle::random_tensor(a.shape(), rng, -0.05, 0.05);
  double previous = std::numeric_limits<double>::infinity();
  for (double k : {0.1, 0.5, 1.0, 2.0}) {
    Tensor<double> b = a;
    for (std::int64_t i = 0; i < b.numel(); ++i) b[i] += k * noise[i];
    const double p = psnr_y(a, b);
    CHECK(p < previous);
    previous = p;
  }
}

TEST_CASE("SSIM luminance term is monotone in constant shifts") {
  const auto a = random_image(16, 16, 5);
  for (double c : {0.01, 0.05, 0.1}) CHECK(ssim_y(a, plus(a, c)) >= ssim_y(a, plus(a, 2 * c)));
}

TEST_CASE("inverted binary image has strongly negative SSIM") {
  std::mt19937_64 rng(6);
  std::bernoulli_distribution bit(0.5);
  Tensor<double> a(Shape{1, 3, 11, 11}), b(Shape{1, 3, 11, 11});
  for (std::int64_t y = 0; y < 11; ++y)
    for (std::int64_t x = 0; x < 11; ++x) {
      const double v = bit(rng) ? 1.0 : 0.0;
      for (int c = 0; c < 3; ++c) {
        a.at(0, c, y, x) = v;
        b.at(0, c, y, x) = 1.0 - v;
      }
    }
  CHECK(ssim_y(a, b) < -0.5);
}

TEST_CASE("metric preconditions") {
  CHECK_THROWS_AS(ssim_y(random_image(10, 20, 1), random_image(10, 20, 2)), ShapeError);
  CHECK_THROWS_AS(psnr_y(random_image(12, 12, 1), random_image(12, 13, 2)), ShapeError);
  MetricOptions crop{2};
  const auto a = random_image(20, 20, 1);
  auto b = a;
  b.at(0, 0, 0, 0) += 0.5;  // only the border differs
  CHECK(std::isinf(psnr_y(a, b, crop)));
  CHECK(std::isfinite(psnr_y(a, b)));
}

TEST_CASE("report aggregation") {
  MetricReport r;
  r.add({"a", 30.0, 0.9});
  r.add({"b", 20.0, 0.7});
  r.add({"c", std::numeric_limits<double>::infinity(), 1.0});
  r.finalize();
  CHECK(r.count == 3);
  CHECK(r.mean_psnr == doctest::Approx(25.0));
  CHECK(r.mean_ssim == doctest::Approx((0.9 + 0.7 + 1.0) / 3));
  CHECK(r.infinite_psnr == 1);
  CHECK(r.warnings.size() == 1);
  const auto doc = nlohmann::json::parse(r.to_json());
  CHECK(doc["count"] == 3);
  CHECK(doc["per_image"][2]["psnr_db"] == "inf");
  CHECK(doc["aggregate"]["mean_psnr_db"].get<double>() == doctest::Approx(25.0));
  const std::string tsv = r.to_tsv();
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 5);
  CHECK(tsv.find("c\tinf\t1\n") != std::string::npos);

  MetricReport all_inf;
  all_inf.add({"x", std::numeric_limits<double>::infinity(), 1.0});
  all_inf.finalize();
  CHECK(std::isinf(all_inf.mean_psnr));
  CHECK(format_psnr(all_inf.mean_psnr) == "inf");
}
