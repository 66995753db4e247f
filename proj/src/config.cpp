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

#include "selfsr/config.hpp"

#include <algorithm>

namespace selfsr {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kDegrade: return "degrade";
    case Stage::kSr: return "sr";
    case Stage::kSrUnpaired: return "sr_unpaired";
  }
  return "unknown";
}

Stage parse_stage(std::string_view text) {
  if (text == "degrade") return Stage::kDegrade;
  if (text == "sr") return Stage::kSr;
  if (text == "sr_unpaired") return Stage::kSrUnpaired;
  throw ConfigError("unknown stage '" + std::string(text) + "' (expected degrade, sr or sr_unpaired)");
}

std::string_view to_string(LrDecay decay) {
  return decay == LrDecay::kNone ? "none" : "linear_last_half";
}

LrDecay parse_lr_decay(std::string_view text) {
  if (text == "none") return LrDecay::kNone;
  if (text == "linear_last_half") return LrDecay::kLinearLastHalf;
  throw ConfigError("unknown lr_decay '" + std::string(text) + "' (expected none or linear_last_half)");
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (total_iters <= 0) throw ConfigError("total_iters must be positive");
  if (batch < 1) throw ConfigError("batch must be at least 1");
  if (r1_interval < 1) throw ConfigError("r1_interval must be at least 1");
  if (fade_steps < 0) throw ConfigError("fade_steps must be non-negative");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be non-negative");
  if (scale_factor < 2 || (scale_factor & (scale_factor - 1)) != 0) {
    throw ConfigError("scale_factor must be a power of two >= 2");
  }
  for (std::size_t i = 0; i < grow_steps.size(); ++i) {
    if (grow_steps[i] <= 0 || grow_steps[i] >= total_iters) {
      throw ConfigError("grow step " + std::to_string(grow_steps[i]) + " outside (0, total_iters)");
    }
    if (i > 0 && grow_steps[i] <= grow_steps[i - 1]) throw ConfigError("grow_steps must be strictly increasing");
  }
  if (is_sr_stage(stage)) {
    sr_net.validate();
    if (static_cast<int>(grow_steps.size()) > sr_net.num_levels() - 1) {
      throw ConfigError("more grow steps than levels available for final_scale x" +
                        std::to_string(sr_net.final_scale));
    }
  } else {
    if (!grow_steps.empty()) throw ConfigError("grow_steps only apply to SR stages");
    if (degrade_net.base_width <= 0 || !(degrade_net.max_disp > 0.0) || disc_width <= 0) {
      throw ConfigError("degradation network widths and max_disp must be positive");
    }
  }
}

double learning_rate_at(const TrainConfig& cfg, std::int64_t iter) {
  if (cfg.lr_decay == LrDecay::kNone) return cfg.lr;
  const double total = static_cast<double>(cfg.total_iters);
  const double half = total / 2.0;
  const double i = static_cast<double>(iter);
  if (i < half) return cfg.lr;
  return cfg.lr * std::max(0.0, (total - i) / (total - half));
}

}  // namespace selfsr
