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

// Command-line entry point. Each subcommand forwards to the library.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "selfsr/app.hpp"
#include "selfsr/error.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"selfsr: learned degradation and progressive face super-resolution"};
  app.require_subcommand(1);

  std::string config, ckpt, in, out, pred, gt, image;
  double perturb = 0.0;
  std::uint64_t seed = 0;
  int downsample = 1, scale = 0, level = 1, crop_border = 0;
  selfsr::CorpusLayout layout;

  auto* train_degrade = app.add_subcommand("train-degrade", "Train the degradation network");
  train_degrade->add_option("--config", config, "Run config JSON")->required();

  auto* degrade = app.add_subcommand("degrade", "Degrade clean LR images with a trained network");
  degrade->add_option("--ckpt", ckpt, "Degradation checkpoint")->required();
  degrade->add_option("--in", in, "Directory of input PNGs")->required();
  degrade->add_option("--out", out, "Output directory")->required();
  auto* perturb_opt = degrade->add_option("--perturb", perturb, "Also write outputs with flow noise of this std");
  degrade->add_option("--seed", seed, "Seed for flow noise");
  degrade->add_option("--downsample", downsample, "Bicubic factor applied to inputs first")->default_val(1);

  auto* train_sr = app.add_subcommand("train-sr", "Train the progressive super-resolution network");
  train_sr->add_option("--config", config, "Run config JSON")->required();

  auto* superres = app.add_subcommand("superres", "Super-resolve LR images");
  superres->add_option("--ckpt", ckpt, "SR checkpoint")->required();
  superres->add_option("--in", in, "Directory of LR PNGs")->required();
  superres->add_option("--out", out, "Output directory")->required();
  auto* scale_opt = superres->add_option("--scale", scale, "Expected scale factor");

  auto* eval = app.add_subcommand("eval", "PSNR/SSIM on the Y channel");
  eval->add_option("--pred", pred, "Directory of predictions")->required();
  eval->add_option("--gt", gt, "Directory of ground truth")->required();
  eval->add_option("--out", out, "Report path (.json; a .tsv is written alongside)")->required();
  eval->add_option("--crop-border", crop_border, "Pixels cropped from every side")->default_val(0);

  auto* dump = app.add_subcommand("dump-features", "Write condition-branch feature maps as PNGs");
  dump->add_option("--ckpt", ckpt, "SR checkpoint")->required();
  dump->add_option("--in", image, "LR input PNG")->required();
  dump->add_option("--level", level, "Level (1-based)")->required();
  dump->add_option("--out", out, "Output directory")->required();

  auto* corpus = app.add_subcommand("make-corpus", "Write a procedural face corpus");
  corpus->add_option("--out", out, "Corpus root")->required();
  corpus->add_option("--count", layout.count, "Number of images per set")->default_val(16);
  corpus->add_option("--hr-size", layout.hr_size, "HR edge length")->default_val(64);
  corpus->add_option("--factor", layout.factor, "HR/LR ratio of the real-style LR set")->default_val(4);
  corpus->add_option("--test-every", layout.test_every, "Every k-th image is marked 'test'")->default_val(0);
  corpus->add_option("--seed", seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*train_degrade || *train_sr) {
    const bool sr = static_cast<bool>(*train_sr);
    const auto result = selfsr::train_command(selfsr::load_run_config(config), sr);
    std::cout << "trained " << result.checkpoint.iteration << " iterations; wrote "
              << result.checkpoint_files.size() << " checkpoint(s)\n";
  } else if (*degrade) {
    selfsr::DegradeOptions opts;
    if (*perturb_opt) opts.perturb_std = perturb;
    opts.seed = seed;
    opts.downsample = downsample;
    std::cout << "degraded " << selfsr::degrade_command(ckpt, in, out, opts) << " image(s)\n";
  } else if (*superres) {
    std::optional<int> s;
    if (*scale_opt) s = scale;
    std::cout << "super-resolved " << selfsr::superres_command(ckpt, in, out, s) << " image(s)\n";
  } else if (*eval) {
    selfsr::MetricOptions opts;
    opts.crop_border = crop_border;
    const auto report = selfsr::eval_command(pred, gt, out, opts);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "evaluated " << report.count << " image(s): mean PSNR " << selfsr::format_psnr(report.mean_psnr)
              << " dB, mean SSIM " << report.mean_ssim << "\n";
  } else if (*dump) {
    std::cout << "wrote " << selfsr::dump_features_command(ckpt, image, level, out) << " feature map(s)\n";
  } else if (*corpus) {
    selfsr::write_procedural_corpus(out, layout, seed);
    std::cout << "wrote " << layout.count << " HR and LR image(s) to " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return selfsr::exit_code_for(e);
  }
}
