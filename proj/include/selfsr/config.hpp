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

#ifndef SELFSR_CONFIG_HPP_
#define SELFSR_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "selfsr/degradation.hpp"
#include "selfsr/optim.hpp"
#include "selfsr/srnet.hpp"

namespace selfsr {

enum class Stage { kDegrade, kSr, kSrUnpaired };
enum class LrDecay { kNone, kLinearLastHalf };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);
std::string_view to_string(LrDecay decay);
LrDecay parse_lr_decay(std::string_view text);

inline bool is_sr_stage(Stage s) { return s == Stage::kSr || s == Stage::kSrUnpaired; }

/// Hyperparameters of one training run. Defaults are the desk-scale values;
/// the loss weights are the published ones.
struct TrainConfig {
  Stage stage = Stage::kSr;
  double lr = 0.003;
  std::int64_t total_iters = 300;
  std::vector<std::int64_t> grow_steps;
  std::int64_t batch = 4;
  std::uint64_t seed = 0;
  Stage1Weights stage1;
  Stage2Weights stage2;
  double r1_gamma = 10.0;
  std::int64_t r1_interval = 1;
  std::int64_t fade_steps = 0;
  LrDecay lr_decay = LrDecay::kNone;
  AdamHyper adam;
  /// HR -> clean LR bicubic factor used to synthesize inputs.
  std::int64_t scale_factor = 4;
  DegradeNetConfig degrade_net;
  std::int64_t disc_width = 32;
  SRNetConfig sr_net;
  std::int64_t checkpoint_every = 0;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Learning rate for 0-based iteration `iter`. With linear_last_half the rate
/// is constant for the first half and decays linearly to zero at total_iters.
double learning_rate_at(const TrainConfig& cfg, std::int64_t iter);

}  // namespace selfsr

#endif  // SELFSR_CONFIG_HPP_
