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
#include "oracles.hpp"
#include "selfsr/error.hpp"
#include "selfsr/srnet.hpp"

using namespace selfsr;
using V = std::vector<Variable<double>>;

namespace {

Variable<double> filled(const Shape& s, double v) { return Variable<double>(Tensor<double>(s, v)); }

Variable<double> probe(const Variable<double>& v, std::uint64_t seed = 13) {
  std::mt19937_64 rng(seed);
  return reduce_sum(mul(v, constant(oracle::random_tensor(v.shape(), rng))), kAllAxes);
}

// Activations with per-channel offsets and spreads; every channel's variance
// is at least 0.1.
Tensor<double> spread_activations(const Shape& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> offset(-5, 5), spread(1.0, 4.0);
  Tensor<double> t = oracle::random_tensor(s, rng);
  for (std::int64_t n = 0; n < s.n(); ++n)
    for (std::int64_t c = 0; c < s.c(); ++c) {
      const double o = offset(rng), k = spread(rng);
      for (std::int64_t y = 0; y < s.h(); ++y)
        for (std::int64_t x = 0; x < s.w(); ++x) t.at(n, c, y, x) = o + k * t.at(n, c, y, x);
    }
  return t;
}

struct Moments {
  double mean, var;
};

Moments plane_moments(const Tensor<double>& t, std::int64_t n, std::int64_t c) {
  const auto h = t.shape().h(), w = t.shape().w();
  double s = 0;
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) s += t.at(n, c, y, x);
  const double mean = s / static_cast<double>(h * w);
  double v = 0;
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) v += (t.at(n, c, y, x) - mean) * (t.at(n, c, y, x) - mean);
  return {mean, v / static_cast<double>(h * w)};
}

}  // namespace

TEST_CASE("instance normalization statistics") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    const Shape s{3, 4, 9, 7};
    const Tensor<double> f = spread_activations(s, rng);
    const Tensor<double> out = instance_normalize(Variable<double>(f), 1e-5).value();
    for (std::int64_t n = 0; n < s.n(); ++n)
      for (std::int64_t c = 0; c < s.c(); ++c) {
        REQUIRE(plane_moments(f, n, c).var >= 0.1);
        const auto m = plane_moments(out, n, c);
        CHECK(std::abs(m.mean) <= 1e-5);
        CHECK(std::abs(std::sqrt(m.var) - 1.0) <= 1e-4);
      }
  }
}

TEST_CASE("normalized std follows sqrt(v / (v + eps)) for low-variance planes") {
  // With eps = 1e-5 a plane of variance 1e-6 is not scaled to unit std.
  Tensor<double> f(Shape{1, 1, 1, 2});
  f[0] = -1e-3;
  f[1] = 1e-3;
  const auto out = instance_normalize(Variable<double>(f), 1e-5).value();
  const double expected = std::sqrt(1e-6 / (1e-6 + 1e-5));
  CHECK(std::sqrt(plane_moments(out, 0, 0).var) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("unit modulation is pure normalization") {
  std::mt19937_64 rng(2);
  const Shape s{2, 3, 5, 5};
  const Variable<double> f(spread_activations(s, rng));
  CHECK(self_cond_norm(f, filled(s, 1.0), 1e-5).value() == instance_normalize(f, 1e-5).value());
  CHECK_THROWS_AS(self_cond_norm(f, filled(Shape{2, 3, 5, 4}, 1.0), 1e-5), ShapeError);
}

TEST_CASE("normalization gradients") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    const Shape s{2, 2, 4, 3};
    std::vector<Tensor<double>> in = {spread_activations(s, rng), oracle::random_tensor(s, rng)};
    CHECK(oracle::gradcheck([](const V& x) { return probe(instance_normalize(x[0], 1e-5)); }, in) < 1e-4);
    CHECK(oracle::gradcheck([](const V& x) { return probe(self_cond_norm(x[0], x[1], 1e-5)); }, in) < 1e-4);
  }
}

TEST_CASE("hinge losses") {
  const Shape s{4, 1, 1, 1};
  CHECK(hr_discriminator_loss(filled(s, 0.0), filled(s, 0.0)).item() == 2.0);
  CHECK(hr_discriminator_loss(filled(s, 1.0), filled(s, -1.0)).item() == 0.0);
  CHECK(hr_discriminator_loss(filled(s, 3.0), filled(s, -2.5)).item() == 0.0);
  CHECK(hr_discriminator_loss(filled(s, 0.5), filled(s, -0.25)).item() == doctest::Approx(0.5 + 0.75));
  CHECK(hr_generator_loss(filled(s, 0.7)).item() == doctest::Approx(-0.7));
  std::mt19937_64 rng(3);
  std::vector<Tensor<double>> in = {oracle::random_away_from_zero(s, rng), oracle::random_away_from_zero(s, rng)};
  // Shift away from the hinge points at +-1.
  for (auto& t : in)
    for (auto& v : t.data()) v = v * 0.5 + (v > 0 ? 0.2 : -0.2);
  CHECK(oracle::gradcheck([](const V& x) { return hr_discriminator_loss(x[0], x[1]); }, in) < 1e-4);
}

TEST_CASE("reconstruction terms") {
  std::mt19937_64 rng(6);
  const auto hr = oracle::random_tensor(Shape{2, 3, 16, 16}, rng);
  CHECK(loss_rec(Variable<double>(hr), Variable<double>(hr)).item() == 0.0);
  SUBCASE("cycle term accepts power-of-two ratios") {
    const auto lr = resize(Variable<double>(hr), 4, 4, ResizeKind::kBicubic);
    CHECK(loss_rec_cycle(Variable<double>(hr), lr).item() == 0.0);
    CHECK_NOTHROW(loss_rec_cycle(Variable<double>(hr), filled(Shape{2, 3, 8, 8}, 0.0)));
  }
  SUBCASE("cycle term rejects other ratios") {
    CHECK_THROWS_AS(loss_rec_cycle(filled(Shape{1, 3, 48, 48}, 0.0), filled(Shape{1, 3, 16, 16}, 0.0)), ShapeError);
    CHECK_THROWS_AS(loss_rec_cycle(filled(Shape{1, 3, 64, 32}, 0.0), filled(Shape{1, 3, 16, 16}, 0.0)), ShapeError);
    CHECK_THROWS_AS(loss_rec_cycle(filled(Shape{1, 3, 16, 16}, 0.0), filled(Shape{1, 3, 16, 16}, 0.0)), ShapeError);
    CHECK_THROWS_AS(loss_rec_cycle(filled(Shape{1, 3, 60, 60}, 0.0), filled(Shape{1, 3, 16, 16}, 0.0)), ShapeError);
  }
  SUBCASE("cycle term gradient") {
    std::vector<Tensor<double>> in = {oracle::random_tensor(Shape{1, 2, 8, 8}, rng),
                                      oracle::random_tensor(Shape{1, 2, 4, 4}, rng)};
    CHECK(oracle::gradcheck([](const V& x) { return loss_rec_cycle(x[0], x[1]); }, in) < 1e-4);
  }
}

TEST_CASE("R1 on a linear discriminator") {
  // D(x) = <w, x> per sample: grad_x D = w, so the penalty is (r/2)||w||^2 and
  // its gradient with respect to w is r * w.
  std::mt19937_64 rng(9);
  const Shape xs{3, 2, 4, 4};
  const Tensor<double> w0 = oracle::random_tensor(Shape{1, 2, 4, 4}, rng);
  const Tensor<double> real = oracle::random_tensor(xs, rng);
  const double r = 10.0;
  Variable<double> w(w0, true);
  auto disc = [&](const Variable<double>& x) { return reduce_sum(mul(x, w), kAxesCHW); };
  const auto penalty = loss_r1<double>(disc, real, r);
  double norm2 = 0;
  for (double v : w0.data()) norm2 += v * v;
  CHECK(std::abs(penalty.item() - r / 2 * norm2) / (r / 2 * norm2) < 1e-6);
  const auto g = grad(penalty, {w})[0].value();
  double worst = 0;
  for (std::int64_t i = 0; i < g.numel(); ++i) worst = std::max(worst, std::abs(g[i] - r * w0[i]) / std::abs(r * w0[i]));
  CHECK(worst < 1e-6);
}

TEST_CASE("R1 on a two-layer discriminator matches finite differences") {
  std::mt19937_64 rng(10);
  const Tensor<double> real = oracle::random_tensor(Shape{2, 3, 5, 5}, rng);
  const ConvSpec c1{3, 4, 3, 1}, c2{4, 1, 1, 1};
  std::vector<Tensor<double>> params = {oracle::random_tensor(Shape{4, 3, 3, 3}, rng),
                                        oracle::random_tensor(Shape{1, 4, 1, 1}, rng),
                                        oracle::random_tensor(Shape{1, 4, 1, 1}, rng),
                                        oracle::random_tensor(Shape{1, 1, 1, 1}, rng)};
  auto penalty_of = [&](const std::vector<Variable<double>>& p) {
    auto disc = [&](const Variable<double>& x) {
      auto h = leaky_relu(conv2d(x, p[0], p[1], c1));
      return reduce_mean(conv2d(h, p[2], p[3], c2), kAxesHW);
    };
    return loss_r1<double>(disc, real, 10.0);
  };
  auto value_at = [&](const std::vector<Tensor<double>>& t) {
    std::vector<Variable<double>> p;
    for (const auto& x : t) p.emplace_back(x, true);
    return penalty_of(p).item();
  };
  std::vector<Variable<double>> vars;
  for (const auto& t : params) vars.emplace_back(t, true);
  const auto analytic = grad(penalty_of(vars), vars);
  double worst = 0;
  auto work = params;
  for (std::size_t k = 0; k < work.size(); ++k) {
    for (std::int64_t i = 0; i < work[k].numel(); ++i) {
      const double x0 = work[k][i];
      work[k][i] = x0 + 1e-5;
      const double fp = value_at(work);
      work[k][i] = x0 - 1e-5;
      const double fm = value_at(work);
      work[k][i] = x0;
      const double num = (fp - fm) / 2e-5, ana = analytic[k].value()[i];
      worst = std::max(worst, std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-2}));
    }
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("loss weights") {
  Stage2Weights w;
  CHECK(w.rec == 150.0);
  CHECK(w.r1 == 3.0);
  const Shape one{1, 1, 1, 1};
  CHECK(stage2_total(filled(one, 0.5), filled(one, 0.01), filled(one, 0.2), w).item() ==
        doctest::Approx(0.5 + 150 * 0.01 + 3 * 0.2).epsilon(1e-15));
}

TEST_CASE("progressive generator and discriminator") {
  SRNetConfig cfg;
  cfg.base_width = 8;
  cfg.min_width = 4;
  cfg.blocks_per_level = 1;
  cfg.final_scale = 8;
  SrGenerator gen(cfg);
  HrDiscriminator disc(cfg);
  ParamStore<float> store;
  gen.init(store, 1);
  disc.init(store, 1);
  ProgressiveState state;
  state.final_scale = 8;
  std::mt19937_64 rng(4);
  const Variable<float> lr(oracle::random_tensor(Shape{2, 3, 6, 5}, rng).cast<float>());

  CHECK(cfg.num_levels() == 3);
  CHECK(cfg.width(1) == 8);
  CHECK(cfg.width(2) == 4);
  CHECK(cfg.width(3) == 4);
  CHECK(gen.forward(store, lr, state).shape() == Shape{2, 3, 12, 10});
  CHECK(disc.forward(store, gen.forward(store, lr, state), 1).shape() == Shape{2, 1, 1, 1});

  for (int expected : {4, 8}) {
    const ParamStore<float> before = store;
    grow(state, store, gen, disc, 1);
    CHECK(state.scale() == expected);
    for (const auto& [name, p] : before.items()) CHECK(store.at(name).var.value() == p.var.value());
    CHECK(store.size() > before.size());
    const auto out = gen.forward(store, lr, state);
    CHECK(out.shape() == Shape{2, 3, 6 * expected, 5 * expected});
    CHECK(disc.forward(store, out, state.active_levels).shape() == Shape{2, 1, 1, 1});
    const auto faded = gen.forward(store, lr, state, 0.5);
    CHECK(faded.shape() == out.shape());
  }
  CHECK_THROWS_AS(grow(state, store, gen, disc, 1), Error);
  CHECK(gen.conv_layers_per_level(2) == 4);

  SUBCASE("condition feature maps") {
    const auto maps = gen.condition_features(store, lr, 2, state);
    CHECK(static_cast<std::int64_t>(maps.size()) == cfg.width(2));
    for (const auto& m : maps) {
      CHECK(m.shape() == Shape{1, 1, 24, 20});
      float lo = 1, hi = 0;
      for (float v : m.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      CHECK(lo == 0.0f);
      CHECK(hi == 1.0f);
    }
    ProgressiveState first;
    first.final_scale = 8;
    CHECK_THROWS_AS(gen.condition_features(store, lr, 2, first), Error);
  }
}

TEST_CASE("R1 through the HR discriminator builds a second-order tape") {
  SRNetConfig cfg;
  cfg.base_width = 4;
  cfg.min_width = 2;
  cfg.final_scale = 2;
  HrDiscriminator disc(cfg);
  ParamStore<double> store;
  disc.init(store, 2);
  std::mt19937_64 rng(5);
  const auto real = oracle::random_tensor(Shape{2, 3, 8, 8}, rng);
  const auto r1 = loss_r1<double>([&](const Variable<double>& x) { return disc.forward(store, x, 1); }, real);
  const auto grads = backward(r1, store, "D.");
  CHECK(grads.size() == store.size());
  double total = 0;
  for (const auto& [name, g] : grads) {
    (void)name;
    for (double v : g.value().data()) total += std::abs(v);
  }
  CHECK(total > 0.0);
}
