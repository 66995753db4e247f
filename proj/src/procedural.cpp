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

#include "selfsr/procedural.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "selfsr/data_io.hpp"
#include "selfsr/error.hpp"
#include "selfsr/imageops.hpp"

namespace selfsr {
namespace {

using Rgb = std::array<double, 3>;

Rgb hsv(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h, 1.0) * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  Rgb rgb{};
  switch (static_cast<int>(hp)) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  const double m = v - c;
  return {rgb[0] + m, rgb[1] + m, rgb[2] + m};
}

struct Ellipse {
  double cx, cy, rx, ry, angle;
  bool contains(double x, double y) const {
    const double ca = std::cos(angle), sa = std::sin(angle);
    const double dx = x - cx, dy = y - cy;
    const double u = (ca * dx + sa * dy) / rx;
    const double v = (-sa * dx + ca * dy) / ry;
    return u * u + v * v <= 1.0;
  }
};

}  // namespace

Tensor<float> render_face(std::int64_t h, std::int64_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + 0x5EED);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double skin_hue = 0.02 + 0.08 * u(rng);
  const Rgb skin = hsv(skin_hue, 0.3 + 0.4 * u(rng), 0.55 + 0.4 * u(rng));
  const Rgb bg_top = hsv(u(rng), 0.2 + 0.5 * u(rng), 0.3 + 0.6 * u(rng));
  const Rgb bg_bottom = hsv(u(rng), 0.2 + 0.5 * u(rng), 0.2 + 0.6 * u(rng));
  const Rgb hair = hsv(0.05 + 0.1 * u(rng), 0.5 * u(rng), 0.1 + 0.4 * u(rng));
  const Rgb eye = hsv(u(rng), 0.6, 0.15 + 0.2 * u(rng));
  const Rgb lips = hsv(0.97 + 0.05 * u(rng), 0.5 + 0.3 * u(rng), 0.4 + 0.3 * u(rng));

  const double tilt = (u(rng) - 0.5) * 0.5;
  const double cx = 0.5 + (u(rng) - 0.5) * 0.12;
  const double cy = 0.52 + (u(rng) - 0.5) * 0.1;
  const double rx = 0.28 + 0.06 * u(rng);
  const double ry = 0.36 + 0.06 * u(rng);
  const double yaw = (u(rng) - 0.5) * 0.08;
  const double ca = std::cos(tilt), sa = std::sin(tilt);
  auto place = [&](double fx, double fy) {
    // Face-local coordinates in head radii to image coordinates.
    const double x = fx * rx, y = fy * ry;
    return std::array<double, 2>{cx + ca * x - sa * y, cy + sa * x + ca * y};
  };
  const Ellipse head{cx, cy, rx, ry, tilt};
  const Ellipse hair_cap{place(0, -0.25)[0], place(0, -0.25)[1], rx * 1.08, ry * 0.85, tilt};
  const double eye_gap = 0.36 + 0.08 * u(rng);
  const double eye_y = -0.15 + 0.08 * u(rng);
  const double eye_r = 0.045 + 0.02 * u(rng);
  const auto le = place(-eye_gap + yaw, eye_y);
  const auto re = place(eye_gap + yaw, eye_y);
  const Ellipse left_eye{le[0], le[1], eye_r * 1.6, eye_r, tilt};
  const Ellipse right_eye{re[0], re[1], eye_r * 1.6, eye_r, tilt};
  const auto mc = place(yaw, 0.45 + 0.08 * u(rng));
  const Ellipse mouth{mc[0], mc[1], rx * (0.25 + 0.15 * u(rng)), ry * (0.04 + 0.05 * u(rng)), tilt};
  const auto nc = place(yaw, 0.12);
  const Ellipse nose{nc[0], nc[1], rx * 0.07, ry * 0.12, tilt};
  const Rgb nose_col{skin[0] * 0.8, skin[1] * 0.75, skin[2] * 0.75};

  Tensor<float> out(Shape{1, 3, h, w});
  constexpr int kSuper = 4;
  for (std::int64_t py = 0; py < h; ++py) {
    for (std::int64_t px = 0; px < w; ++px) {
      Rgb acc{0, 0, 0};
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          const double x = (px + (sx + 0.5) / kSuper) / static_cast<double>(w);
          const double y = (py + (sy + 0.5) / kSuper) / static_cast<double>(h);
          Rgb c;
          for (int k = 0; k < 3; ++k) c[k] = bg_top[k] * (1 - y) + bg_bottom[k] * y;
          if (hair_cap.contains(x, y)) c = hair;
          if (head.contains(x, y)) {
            const double shade = 1.0 - 0.25 * std::hypot((x - cx) / rx, (y - cy) / ry);
            for (int k = 0; k < 3; ++k) c[k] = skin[k] * shade;
            if (left_eye.contains(x, y) || right_eye.contains(x, y)) c = eye;
            if (nose.contains(x, y)) c = nose_col;
            if (mouth.contains(x, y)) c = lips;
          }
          for (int k = 0; k < 3; ++k) acc[k] += c[k];
        }
      }
      for (int k = 0; k < 3; ++k) {
        const double v = std::clamp(acc[k] / (kSuper * kSuper), 0.0, 1.0);
        out.at(0, k, py, px) = static_cast<float>(v * 2.0 - 1.0);
      }
    }
  }
  return out;
}

Tensor<float> real_style_lr(const Tensor<float>& hr, int factor, std::uint64_t seed, double noise_std) {
  std::mt19937_64 rng(seed ^ 0xB1D5EEDull);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Shape& s = hr.shape();
  const double angle = u(rng) * std::numbers::pi;
  const int taps = 2 + static_cast<int>(u(rng) * 3);  // blur length in HR pixels
  const double dx = std::cos(angle), dy = std::sin(angle);
  Tensor<float> blurred(s);
  for (std::int64_t n = 0; n < s.n(); ++n) {
    for (std::int64_t c = 0; c < s.c(); ++c) {
      for (std::int64_t y = 0; y < s.h(); ++y) {
        for (std::int64_t x = 0; x < s.w(); ++x) {
          double acc = 0;
          for (int t = 0; t < taps; ++t) {
            const double off = t - (taps - 1) / 2.0;
            const auto sx = std::clamp<std::int64_t>(std::llround(x + off * dx), 0, s.w() - 1);
            const auto sy = std::clamp<std::int64_t>(std::llround(y + off * dy), 0, s.h() - 1);
            acc += hr.at(n, c, sy, sx);
          }
          blurred.at(n, c, y, x) = static_cast<float>(acc / taps);
        }
      }
    }
  }
  Tensor<float> lr = synth_clean_lr(blurred, factor);
  std::normal_distribution<double> noise(0.0, noise_std);
  for (auto& v : lr.data()) v = static_cast<float>(std::clamp(v + noise(rng), -1.0, 1.0));
  return lr;
}

void write_procedural_corpus(const std::filesystem::path& root, const CorpusLayout& layout, std::uint64_t seed) {
  if (layout.count < 1) throw ConfigError("corpus count must be >= 1");
  if (layout.factor < 1 || layout.hr_size % layout.factor != 0) {
    throw ConfigError("hr_size must be divisible by factor");
  }
  std::filesystem::create_directories(root / "hr");
  std::filesystem::create_directories(root / "lr");
  std::ofstream manifest(root / "manifest.tsv");
  if (!manifest) throw DataError("cannot write manifest under " + root.string());
  manifest << "id\tsplit\n";
  for (int i = 0; i < layout.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "face_%04d.png", i);
    const std::uint64_t face_seed = seed * 1000003ull + static_cast<std::uint64_t>(i);
    const auto hr = render_face(layout.hr_size, layout.hr_size, face_seed);
    write_png(root / "hr" / name, tensor_to_image(hr));
    // The LR set shows different faces so the two sets are genuinely unpaired.
    const std::uint64_t other = face_seed ^ (0xFACEull << 32);
    const auto lr = real_style_lr(render_face(layout.hr_size, layout.hr_size, other), layout.factor, other);
    write_png(root / "lr" / name, tensor_to_image(lr));
    const bool test = layout.test_every > 0 && (i + 1) % layout.test_every == 0;
    manifest << name << '\t' << (test ? "test" : "train") << '\n';
  }
}

}  // namespace selfsr
