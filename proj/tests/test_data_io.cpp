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

#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "selfsr/data_io.hpp"
#include "selfsr/error.hpp"

using namespace selfsr;
namespace fs = std::filesystem;

namespace {

Image8 random_image8(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Image8 img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<std::size_t>(w * h * 3));
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xFF);
  return img;
}

DatasetIndex synthetic_index(int n, PairingMode mode, int lr_count = -1) {
  DatasetIndex idx;
  idx.mode = mode;
  for (int i = 0; i < n; ++i) {
    ImageRecord r;
    r.id = std::to_string(i);
    r.pixels = Tensor<float>(Shape{1, 3, 2, 2}, static_cast<float>(i));
    idx.hr_records.push_back(r);
  }
  for (int i = 0; i < (lr_count < 0 ? n : lr_count); ++i) {
    ImageRecord r;
    r.id = std::to_string(i);
    r.pixels = Tensor<float>(Shape{1, 3, 1, 1}, static_cast<float>(i));
    idx.lr_records.push_back(r);
  }
  return idx;
}

}  // namespace

TEST_CASE("PNG round trip is bit-exact") {
  fixture::TempDir dir("png");
  const Image8 img = random_image8(7, 5, 1);
  write_png(dir.path() / "sub" / "x.png", img);
  const Image8 back = read_png(dir.path() / "sub" / "x.png");
  CHECK(back.width == 7);
  CHECK(back.height == 5);
  CHECK(back.pixels == img.pixels);
  CHECK(tensor_to_image(image_to_tensor(img)).pixels == img.pixels);
  CHECK_THROWS_AS(read_png(dir.path() / "missing.png"), DataError);
  std::ofstream(dir.path() / "junk.png") << "not a png";
  CHECK_THROWS_AS(read_png(dir.path() / "junk.png"), DataError);
}

TEST_CASE("pixel normalization") {
  for (int code = 0; code < 256; ++code) {
    CHECK(to_unit_range(from_unit_range(static_cast<std::uint8_t>(code))) == code);
  }
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    // 1/510 on the [0, 1] scale is 1/255 on [-1, 1].
    CHECK(std::abs(from_unit_range(to_unit_range(v)) - v) <= 1.0 / 255.0 + 1e-12);
  }
  CHECK(to_unit_range(-3.0) == 0);
  CHECK(to_unit_range(3.0) == 255);
}

TEST_CASE("index listing is lexicographic and recursive") {
  fixture::TempDir dir("list");
  const Image8 img = random_image8(2, 2, 1);
  for (const char* name : {"b.png", "a/z.png", "c.PNG", "a/b.png", "10.png", "2.png"}) write_png(dir.path() / name, img);
  std::ofstream(dir.path() / "notes.txt") << "x";
  const auto ids = list_pngs(dir.path());
  CHECK(ids == std::vector<std::string>{"10.png", "2.png", "a/b.png", "a/z.png", "b.png", "c.PNG"});
  CHECK_THROWS_AS(list_pngs(dir.path() / "absent"), DataError);
}

TEST_CASE("clean LR synthesis") {
  const Tensor<float> hr128(Shape{1, 3, 128, 128}, 0.25f);
  const auto lr = synth_clean_lr(hr128, 8);
  CHECK(lr.shape() == Shape{1, 3, 16, 16});
  for (float v : lr.data()) CHECK(v == doctest::Approx(0.25f));
  CHECK(synth_clean_lr(Tensor<float>(Shape{1, 3, 64, 64}), 4).shape() == Shape{1, 3, 16, 16});
  CHECK_THROWS_AS(synth_clean_lr(Tensor<float>(Shape{1, 3, 60, 64}), 8), DataError);
}

TEST_CASE("batching") {
  SUBCASE("drops the partial batch") {
    const auto idx = synthetic_index(10, PairingMode::kPairedSynthetic);
    BatchStream s(idx, 4, 1);
    CHECK(s.batches_per_epoch() == 2);
    CHECK_THROWS_AS(s.batch(0, 2), DataError);
  }
  SUBCASE("same seed and epoch give the same order") {
    const auto idx = synthetic_index(10, PairingMode::kPairedSynthetic);
    BatchStream s1(idx, 4, 9), s2(idx, 4, 9);
    for (int e = 0; e < 3; ++e)
      for (int b = 0; b < 2; ++b) CHECK(s1.batch(e, b).hr_index == s2.batch(e, b).hr_index);
    CHECK(epoch_order(10, 9, 0, 1) != epoch_order(10, 9, 1, 1));
  }
  SUBCASE("paired batches stay aligned") {
    const auto idx = synthetic_index(8, PairingMode::kPseudoPaired);
    BatchStream s(idx, 4, 3);
    const auto b = s.batch(1, 1);
    CHECK(b.lr_index == b.hr_index);
    for (std::int64_t n = 0; n < 4; ++n) CHECK(b.lr.at(n, 0, 0, 0) == b.hr.at(n, 0, 0, 0));
  }
  SUBCASE("unpaired LR and HR orders are drawn independently") {
    const auto idx = synthetic_index(10, PairingMode::kUnpaired);
    int same = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      BatchStream s(idx, 10, seed);
      const auto b = s.batch(0, 0);
      if (b.lr_index == b.hr_index) ++same;
    }
    // Each match has probability 1/10! for independent shuffles.
    CHECK(same == 0);
  }
  SUBCASE("unequal unpaired set sizes cycle independently") {
    const auto idx = synthetic_index(8, PairingMode::kUnpaired, 5);
    BatchStream s(idx, 2, 1);
    for (int step = 0; step < 20; ++step) {
      const auto b = s.at_step(step);
      for (auto i : b.lr_index) CHECK(i < 5);
    }
  }
  SUBCASE("empty or undersized input is rejected") {
    DatasetIndex empty;
    CHECK_THROWS_AS(BatchStream(empty, 1, 0), DataError);
    CHECK_THROWS_AS(BatchStream(synthetic_index(3, PairingMode::kUnpaired), 4, 0), DataError);
    CHECK_THROWS_AS(BatchStream(synthetic_index(3, PairingMode::kUnpaired), 0, 0), ConfigError);
  }
}

TEST_CASE("horizontal flip augmentation") {
  SUBCASE("row flip") {
    Tensor<float> t(Shape{1, 1, 1, 2});
    t[0] = 1;
    t[1] = 2;
    hflip_sample(t, 0);
    CHECK(t[0] == 2);
    CHECK(t[1] == 1);
  }
  std::mt19937_64 rng(1);
  PairBatch batch;
  batch.hr = oracle::random_tensor(Shape{16, 3, 4, 6}, rng).cast<float>();
  batch.lr = oracle::random_tensor(Shape{16, 3, 2, 3}, rng).cast<float>();
  const PairBatch original = batch;
  SUBCASE("forced flips are an involution") {
    hflip_augment(batch, PairingMode::kPairedSynthetic, 1, 0, true);
    CHECK_FALSE(batch.hr == original.hr);
    hflip_augment(batch, PairingMode::kPairedSynthetic, 1, 0, true);
    CHECK(batch.hr == original.hr);
    CHECK(batch.lr == original.lr);
  }
  SUBCASE("paired samples flip jointly and flags are deterministic") {
    hflip_augment(batch, PairingMode::kPseudoPaired, 5, 3);
    int flipped = 0;
    for (std::int64_t n = 0; n < 16; ++n) {
      const bool hr_flipped = !(batch.hr.sample(n) == original.hr.sample(n));
      const bool lr_flipped = !(batch.lr.sample(n) == original.lr.sample(n));
      CHECK(hr_flipped == lr_flipped);
      CHECK(hr_flipped == flip_flag(5, 3, n, 0x4852));
      flipped += hr_flipped;
    }
    CHECK(flipped > 0);
    CHECK(flipped < 16);
  }
}

TEST_CASE("corpus loading") {
  fixture::TempDir dir("corpus");
  CorpusLayout layout;
  layout.count = 4;
  layout.hr_size = 32;
  layout.factor = 4;
  layout.test_every = 2;
  write_procedural_corpus(dir.path(), layout, 3);

  CorpusSpec spec;
  spec.root = dir.path();
  spec.factor = 4;
  SUBCASE("paired synthetic derives LR from HR") {
    const auto idx = load_corpus(spec);
    REQUIRE(idx.hr_records.size() == 4);
    CHECK(idx.lr_records[2].pixels == synth_clean_lr(idx.hr_records[2].pixels, 4));
    CHECK(idx.hr_records[0].id == "face_0000.png");
    CHECK(idx.hr_records[0].source_h == 32);
  }
  SUBCASE("unpaired reads the LR directory") {
    spec.mode = PairingMode::kUnpaired;
    const auto idx = load_corpus(spec);
    CHECK(idx.lr_records.size() == 4);
    CHECK(idx.lr_records[0].pixels.shape() == Shape{1, 3, 8, 8});
  }
  SUBCASE("pseudo pairs need every HR id") {
    spec.mode = PairingMode::kPseudoPaired;
    CHECK(load_corpus(spec).lr_records.size() == 4);
    fs::remove(dir.path() / "lr" / "face_0001.png");
    CHECK_THROWS_AS(load_corpus(spec), DataError);
  }
  SUBCASE("manifest split filter") {
    spec.split = "test";
    const auto idx = load_corpus(spec);
    REQUIRE(idx.hr_records.size() == 2);
    CHECK(idx.hr_records[0].id == "face_0001.png");
    CHECK(read_manifest(dir.path() / "manifest.tsv").size() == 4);
  }
  SUBCASE("missing corpus names the path") {
    spec.root = dir.path() / "nowhere";
    try {
      load_corpus(spec);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("nowhere") != std::string::npos);
    }
  }
}
