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
#include "selfsr/degradation.hpp"
#include "selfsr/error.hpp"

using namespace selfsr;
using V = std::vector<Variable<double>>;

namespace {

Variable<double> filled(const Shape& s, double v) { return Variable<double>(Tensor<double>(s, v)); }

}  // namespace

TEST_CASE("LR adversarial loss closed forms") {
  const Shape s{2, 1, 3, 3};
  SUBCASE("D = 0.5 everywhere gives 2 log 2") {
    auto d = lr_discriminator_loss(filled(s, 0.0), filled(s, 0.0));
    CHECK(d.item() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-14));
    CHECK(lr_generator_loss(filled(s, 0.0)).item() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
  SUBCASE("a confident, correct discriminator has near-zero loss") {
    auto d = lr_discriminator_loss(filled(s, 30.0), filled(s, -30.0));
    CHECK(d.item() < 1e-12);
  }
  SUBCASE("saturated logits stay finite through the clamp") {
    auto d = lr_discriminator_loss(filled(s, -1000.0), filled(s, 1000.0));
    CHECK(d.item() == doctest::Approx(-2 * std::log(1e-8)));
  }
  SUBCASE("gradients") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      std::mt19937_64 rng(seed);
      std::vector<Tensor<double>> in = {oracle::random_tensor(s, rng, -3, 3), oracle::random_tensor(s, rng, -3, 3)};
      CHECK(oracle::gradcheck([](const V& x) { return lr_discriminator_loss(x[0], x[1]); }, in) < 1e-4);
      CHECK(oracle::gradcheck([](const V& x) { return lr_generator_loss(x[0]); }, in) < 1e-4);
    }
  }
}

TEST_CASE("smoothness term") {
  SUBCASE("constant flow has zero variation") {
    FlowField<double> f{filled(Shape{1, 2, 5, 4}, 1.25), 2.0};
    CHECK(loss_smooth(f).item() == 0.0);
  }
  SUBCASE("2x2 hand case") {
    // dx = [[0, 1], [2, 4]], dy = 0: horizontal |1|, |2| and vertical |2|, |3|,
    // each averaged over both channels' valid sites.
    Tensor<double> t(Shape{1, 2, 2, 2});
    t.at(0, 0, 0, 1) = 1;
    t.at(0, 0, 1, 0) = 2;
    t.at(0, 0, 1, 1) = 4;
    FlowField<double> f{Variable<double>(t), 2.0};
    CHECK(loss_smooth(f).item() == doctest::Approx((1.0 + 2.0) / 4 + (2.0 + 3.0) / 4).epsilon(1e-15));
  }
  SUBCASE("gradient") {
    std::mt19937_64 rng(4);
    std::vector<Tensor<double>> in = {oracle::random_tensor(Shape{1, 2, 4, 5}, rng)};
    CHECK(oracle::gradcheck([](const V& x) { return loss_smooth(FlowField<double>{x[0], 2.0}); }, in) < 1e-4);
  }
}

TEST_CASE("identity term and weighted sum") {
  auto a = filled(Shape{1, 3, 2, 2}, 0.5), b = filled(Shape{1, 3, 2, 2}, -0.25);
  CHECK(loss_identity(a, b).item() == doctest::Approx(0.75));
  CHECK_THROWS_AS(l1_mean(a, filled(Shape{1, 3, 2, 3}, 0.0)), ShapeError);
  Stage1Weights w;
  CHECK(w.identity == 10.0);
  CHECK(w.smooth == 1.0);
  auto total = stage1_total(filled(Shape{1, 1, 1, 1}, 0.3), filled(Shape{1, 1, 1, 1}, 0.2),
                            filled(Shape{1, 1, 1, 1}, 0.7), w);
  CHECK(total.item() == doctest::Approx(0.3 + 10 * 0.2 + 1 * 0.7).epsilon(1e-15));
}

TEST_CASE("degradation network") {
  DegradeNetConfig cfg{4, 2.0};
  DegradationNet net(cfg);
  ParamStore<double> store;
  net.init(store, 5);
  std::mt19937_64 rng(8);
  Variable<double> x(oracle::random_tensor(Shape{2, 3, 8, 8}, rng));

  SUBCASE("a fresh network warps by the identity") {
    auto out = net.forward(store, x);
    for (double v : out.flow.offsets.value().data()) CHECK(v == 0.0);
    CHECK(out.degraded.value() == out.intermediate.value());
    CHECK(out.degraded.shape() == x.shape());
  }
  SUBCASE("flow magnitudes never exceed max_disp") {
    // The flow head starts at zero; give it large weights to drive tanh into saturation.
    Tensor<double>& fw = store.at("G.flow.w").var.mutable_value();
    fw = oracle::random_tensor(fw.shape(), rng, -50.0, 50.0);
    auto out = net.forward(store, x);
    double m = 0;
    for (double v : out.flow.offsets.value().data()) m = std::max(m, std::abs(v));
    CHECK(m <= 2.0);
    CHECK(m > 1.0);
  }
  SUBCASE("input geometry is validated") {
    CHECK_THROWS_AS(net.forward(store, Variable<double>(Tensor<double>(Shape{1, 3, 6, 8}))), ShapeError);
    CHECK_THROWS_AS(net.forward(store, Variable<double>(Tensor<double>(Shape{1, 1, 8, 8}))), ShapeError);
  }
  SUBCASE("parameter gradients through the image branch") {
    const std::string name = "G.enc1.w";
    auto loss_at = [&](const Tensor<double>& w) {
      ParamStore<double> s = store;
      s.at(name).var.mutable_value() = w;
      return loss_identity(net.forward(s, x).intermediate, x);
    };
    const auto g = backward(loss_identity(net.forward(store, x).intermediate, x), store, name);
    Tensor<double> w = store.at(name).var.value();
    double worst = 0;
    for (std::int64_t i = 0; i < w.numel(); i += 7) {
      const double w0 = w[i];
      w[i] = w0 + 1e-5;
      const double fp = loss_at(w).item();
      w[i] = w0 - 1e-5;
      const double fm = loss_at(w).item();
      w[i] = w0;
      const double num = (fp - fm) / 2e-5;
      const double ana = g.at(name).value()[i];
      worst = std::max(worst, std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-2}));
    }
    CHECK(worst < 1e-4);
  }
  SUBCASE("flow perturbation") {
    for (auto& v : store.at("G.flow.b").var.mutable_value().data()) v = 0.3;
    auto out = net.forward(store, x);
    CHECK(perturb_flow(out, 0.0, 1) == out.degraded.value());
    auto p1 = perturb_flow(out, 0.5, 1);
    CHECK(p1 == perturb_flow(out, 0.5, 1));
    CHECK_FALSE(p1 == out.degraded.value());
    CHECK_FALSE(p1 == perturb_flow(out, 0.5, 2));
    CHECK_THROWS_AS(perturb_flow(out, -1.0, 1), ConfigError);
  }
}

TEST_CASE("LR discriminator produces patch logits") {
  LrDiscriminator d(4);
  ParamStore<float> store;
  d.init(store, 1);
  auto out = d.forward(store, Variable<float>(Tensor<float>(Shape{3, 3, 16, 16}, 0.1f)));
  CHECK(out.shape() == Shape{3, 1, 4, 4});
}
