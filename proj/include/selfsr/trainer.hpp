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

#ifndef SELFSR_TRAINER_HPP_
#define SELFSR_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selfsr/checkpoint.hpp"
#include "selfsr/config.hpp"
#include "selfsr/data_io.hpp"

namespace selfsr {

struct LossRow {
  std::int64_t iter = 0;
  std::string name;
  double value = 0;
};

/// What one iteration produced. `iter` is 1-based.
struct IterationStats {
  std::int64_t iter = 0;
  std::map<std::string, double> losses;
  Shape output_shape;
  double lr = 0;
  int active_levels = 1;
  double fade_alpha = 1.0;
  // Stage 1 only, measured on the generator output before the update.
  double max_abs_flow = 0;
  bool degraded_equals_intermediate = false;
};

struct GrowEvent {
  std::int64_t iter = 0;  // 0-based iteration about to run at the new scale
  int old_scale = 0;
  int new_scale = 0;
  ParamStore<float> before;  // deep copy taken just before growing
  const ParamStore<float>* after = nullptr;
};

struct TrainHooks {
  std::function<void(const IterationStats&)> on_iteration;
  std::function<void(const GrowEvent&)> on_grow;
};

struct TrainOptions {
  /// When set, receives loss.tsv and checkpoints/ (created if missing).
  std::optional<std::filesystem::path> out_dir;
  std::optional<Checkpoint> resume;
  TrainHooks hooks;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<LossRow> log;
  std::vector<std::filesystem::path> checkpoint_files;
};

/// Domain-adaptive degradation training on an unpaired index: clean LR inputs
/// are bicubic downsamples of the HR batch, real LR comes from the LR set.
TrainResult run_stage1(const TrainConfig& cfg, const DatasetIndex& data, const TrainOptions& opts = {});

/// Progressive super-resolution training. Stage kSr uses aligned (LR, HR)
/// pairs and the L1 reconstruction term; kSrUnpaired uses the cycle term.
TrainResult run_stage2(const TrainConfig& cfg, const DatasetIndex& data, const TrainOptions& opts = {});

/// Fresh parameters for the network family of `cfg.stage`.
Checkpoint initial_checkpoint(const TrainConfig& cfg);

/// Formats one loss-log line without the trailing newline.
std::string format_loss_row(const LossRow& row);

/// Mean of `name` over 1-based iterations [first, last].
double window_mean(const std::vector<LossRow>& log, const std::string& name, std::int64_t first, std::int64_t last);

}  // namespace selfsr

#endif  // SELFSR_TRAINER_HPP_
