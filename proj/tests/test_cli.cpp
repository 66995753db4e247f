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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "selfsr/app.hpp"
#include "selfsr/error.hpp"

using namespace selfsr;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = std::string("\"") + SELFSR_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

TrainConfig small_degrade() {
  TrainConfig cfg;
  cfg.stage = Stage::kDegrade;
  cfg.degrade_net.base_width = 4;
  cfg.disc_width = 4;
  cfg.seed = 5;
  return cfg;
}

TrainConfig small_sr() {
  TrainConfig cfg;
  cfg.stage = Stage::kSr;
  cfg.sr_net.base_width = 8;
  cfg.sr_net.blocks_per_level = 1;
  cfg.sr_net.final_scale = 4;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("run config parsing") {
  const std::string minimal = R"({"stage": "sr", "output_dir": "out", "corpus": {"root": "data"}})";
  SUBCASE("defaults and relative paths") {
    const RunConfig cfg = parse_run_config(minimal, "/base");
    CHECK(cfg.train.stage == Stage::kSr);
    CHECK(cfg.output_dir == fs::path("/base/out"));
    CHECK(cfg.corpus.root == fs::path("/base/data"));
    CHECK(cfg.corpus.mode == PairingMode::kPairedSynthetic);
    CHECK(cfg.train.stage2.rec == 150.0);
    CHECK(cfg.train.adam.beta2 == 0.99);
    CHECK(parse_run_config(R"({"stage": "degrade", "output_dir": "o", "corpus": {"root": "d"}})").corpus.mode ==
          PairingMode::kUnpaired);
  }
  SUBCASE("serialization round trip") {
    const RunConfig cfg = parse_run_config(
        R"({"stage": "sr", "output_dir": "/o", "corpus": {"root": "/d", "mode": "pseudo_paired"},
            "grow_steps": [10, 20], "sr_net": {"final_scale": 8}, "lambda_rec": 2.5})");
    const std::string text = run_config_to_json(cfg);
    CHECK(run_config_to_json(parse_run_config(text)) == text);
    CHECK(cfg.train.grow_steps == std::vector<std::int64_t>{10, 20});
    CHECK(cfg.corpus.factor == 8);
  }
  SUBCASE("strictness") {
    CHECK_THROWS_AS(parse_run_config(R"({"stage": "sr", "output_dir": "o", "corpus": {"root": "d"}, "lr_typo": 1})"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_run_config(R"({"stage": "sr", "output_dir": "o", "corpus": {"root": "d"}, "adam": {"beta3": 1}})"),
        ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"output_dir": "o", "corpus": {"root": "d"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"stage": "sr", "output_dir": "o", "corpus": {"root": "d"}, "batch": "4"})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"stage": "sr", "output_dir": "o", "corpus": {"root": "d"}, "lr": -1})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config("{not json"), ConfigError);
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(CheckpointError(CheckpointError::Kind::kStageMismatch, "x")) == 2);
  CHECK(exit_code_for(CheckpointError(CheckpointError::Kind::kChecksum, "x")) == 3);
  CHECK(exit_code_for(DataError("x")) == 3);
  CHECK(exit_code_for(NumericalError("x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("command line") {
  fixture::TempDir dir("cli");
  const fs::path root = dir.path();
  CorpusLayout layout;
  layout.count = 3;
  layout.hr_size = 32;
  layout.factor = 4;
  write_procedural_corpus(root / "corpus", layout, 2);
  fs::create_directories(root / "clean");
  for (const auto& id : list_pngs(root / "corpus" / "hr")) {
    const auto hr = image_to_tensor(read_png(root / "corpus" / "hr" / id));
    write_png(root / "clean" / id, tensor_to_image(synth_clean_lr(hr, 4)));
  }
  const Checkpoint deg = initial_checkpoint(small_degrade());
  save_checkpoint(root / "deg.sfsr", deg);
  const Checkpoint sr = initial_checkpoint(small_sr());
  save_checkpoint(root / "sr.sfsr", sr);

  SUBCASE("usage errors") {
    CHECK(cli("", root).code == 2);
    CHECK(cli("superres --ckpt x", root).code == 2);
    CHECK(cli("--help", root).code == 0);
  }
  SUBCASE("missing corpus is a data error naming the path") {
    std::ofstream(root / "cfg.json") << R"({"stage": "degrade", "output_dir": "run", "corpus": {"root": "absent"}})";
    const Run r = cli("train-degrade --config " + q(root / "cfg.json"), root);
    CHECK(r.code == 3);
    CHECK(r.err.find((root / "absent").string()) != std::string::npos);
  }
  SUBCASE("bad config is a config error") {
    std::ofstream(root / "cfg.json") << R"({"stage": "degrade", "output_dir": "run", "corpus": {"root": "x"}, "q": 1})";
    CHECK(cli("train-degrade --config " + q(root / "cfg.json"), root).code == 2);
  }
  SUBCASE("degrade matches the library forward pass") {
    const Run r = cli("degrade --ckpt " + q(root / "deg.sfsr") + " --in " + q(root / "clean") + " --out " +
                          q(root / "degraded") + " --perturb 0",
                      root);
    REQUIRE(r.code == 0);
    for (const auto& id : list_pngs(root / "clean")) {
      const auto clean = image_to_tensor(read_png(root / "clean" / id));
      const auto expected = tensor_to_image(degrade_forward(deg, clean).degraded);
      CHECK(read_png(root / "degraded" / id).pixels == expected.pixels);
      CHECK(read_png(root / "degraded" / "perturbed" / id).pixels == expected.pixels);
    }
    CHECK(cli("degrade --ckpt " + q(root / "sr.sfsr") + " --in " + q(root / "clean") + " --out " + q(root / "x"), root)
              .code == 2);
  }
  SUBCASE("superres output geometry and scale checks") {
    REQUIRE(cli("superres --ckpt " + q(root / "sr.sfsr") + " --in " + q(root / "clean") + " --out " +
                     q(root / "sr") + " --scale 2",
                 root)
                .code == 0);
    const auto img = read_png(root / "sr" / "face_0000.png");
    CHECK(img.width == 16);
    CHECK(cli("superres --ckpt " + q(root / "sr.sfsr") + " --in " + q(root / "clean") + " --out " + q(root / "sr4") +
                  " --scale 4",
              root)
              .code == 2);
  }
  SUBCASE("eval of ground truth against itself") {
    const fs::path gt = root / "corpus" / "hr";
    REQUIRE(cli("eval --pred " + q(gt) + " --gt " + q(gt) + " --out " + q(root / "report.json"), root).code == 0);
    const auto doc = nlohmann::json::parse(slurp(root / "report.json"));
    CHECK(doc["count"] == 3);
    CHECK(doc["aggregate"]["mean_ssim"] == 1.0);
    CHECK(doc["aggregate"]["mean_psnr_db"] == "inf");
    for (const auto& row : doc["per_image"]) CHECK(row["psnr_db"] == "inf");
    CHECK(fs::exists(root / "report.tsv"));
    CHECK(cli("eval --pred " + q(root / "clean") + " --gt " + q(gt) + " --out " + q(root / "r2.json"), root).code == 3);
  }
  SUBCASE("dump-features") {
    const fs::path img = root / "clean" / "face_0001.png";
    REQUIRE(cli("dump-features --ckpt " + q(root / "sr.sfsr") + " --in " + q(img) + " --level 1 --out " +
                    q(root / "maps"),
                root)
                .code == 0);
    const auto files = list_pngs(root / "maps");
    CHECK(files.size() == static_cast<std::size_t>(sr.sr_net.width(1)));
    for (const auto& f : files) {
      const auto m = read_png(root / "maps" / f);
      const auto [lo, hi] = std::minmax_element(m.pixels.begin(), m.pixels.end());
      CHECK(*lo == 0);
      CHECK(*hi == 255);
    }
    REQUIRE(cli("dump-features --ckpt " + q(root / "sr.sfsr") + " --in " + q(img) + " --level 1 --out " +
                    q(root / "maps2"),
                root)
                .code == 0);
    for (const auto& f : files) CHECK(read_png(root / "maps" / f).pixels == read_png(root / "maps2" / f).pixels);
    CHECK(cli("dump-features --ckpt " + q(root / "sr.sfsr") + " --in " + q(img) + " --level 2 --out " +
                  q(root / "m3"),
              root)
              .code == 2);
  }
  SUBCASE("make-corpus") {
    REQUIRE(cli("make-corpus --out " + q(root / "mc") + " --count 2 --hr-size 16 --factor 2", root).code == 0);
    CHECK(list_pngs(root / "mc" / "hr").size() == 2);
    CHECK(read_png(root / "mc" / "lr" / "face_0000.png").width == 8);
  }
}
