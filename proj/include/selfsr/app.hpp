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

#ifndef SELFSR_APP_HPP_
#define SELFSR_APP_HPP_

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "selfsr/checkpoint.hpp"
#include "selfsr/config.hpp"
#include "selfsr/data_io.hpp"
#include "selfsr/metrics.hpp"
#include "selfsr/procedural.hpp"
#include "selfsr/trainer.hpp"

namespace selfsr {

/// A complete training run: hyperparameters, corpus and output location.
struct RunConfig {
  TrainConfig train;
  CorpusSpec corpus;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> resume;
};

/// Parses a RunConfig document. Unknown keys anywhere are rejected. Relative
/// paths are resolved against `base_dir`. Throws ConfigError.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& cfg);

/// Process exit status for an exception escaping a command:
/// 2 configuration, 3 data or checkpoint I/O, 4 numerical, 1 anything else.
int exit_code_for(const std::exception& e);

/// train-degrade / train-sr. Writes loss.tsv, checkpoints/ and run_config.json
/// under cfg.output_dir.
TrainResult train_command(const RunConfig& cfg, bool sr_family);

/// Degraded LR for a (1, 3, h, w) clean input; optionally also the variant
/// with a perturbed flow field.
struct DegradeResult {
  Tensor<float> degraded;
  std::optional<Tensor<float>> perturbed;
};
DegradeResult degrade_forward(const Checkpoint& ckpt, const Tensor<float>& clean_lr,
                              std::optional<double> perturb_std = std::nullopt, std::uint64_t seed = 0);

struct DegradeOptions {
  std::optional<double> perturb_std;
  std::uint64_t seed = 0;
  int downsample = 1;  // bicubic factor applied to inputs first
};
/// Writes out/<id> for every PNG under `in`, plus out/perturbed/<id> when
/// perturbing. Returns the number of inputs.
std::size_t degrade_command(const std::filesystem::path& ckpt, const std::filesystem::path& in,
                            const std::filesystem::path& out, const DegradeOptions& opts);

/// Super-resolves a (1, 3, h, w) input at the checkpoint's active scale.
Tensor<float> superres_forward(const Checkpoint& ckpt, const Tensor<float>& lr);
std::size_t superres_command(const std::filesystem::path& ckpt, const std::filesystem::path& in,
                             const std::filesystem::path& out, std::optional<int> scale);

/// Compares every PNG in `gt` with the same id in `pred`. Writes `out` as
/// JSON and a TSV next to it (same stem, .tsv).
MetricReport eval_command(const std::filesystem::path& pred, const std::filesystem::path& gt,
                          const std::filesystem::path& out, const MetricOptions& opts = {});

/// Writes one gray PNG per condition-branch channel of `level`.
std::size_t dump_features_command(const std::filesystem::path& ckpt, const std::filesystem::path& image,
                                  int level, const std::filesystem::path& out);

/// Reads an RGB PNG as a tensor in [0, 1] (double) for metrics.
Tensor<double> read_unit_image(const std::filesystem::path& path);

}  // namespace selfsr

#endif  // SELFSR_APP_HPP_
