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

#ifndef SELFSR_CHECKPOINT_HPP_
#define SELFSR_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "selfsr/config.hpp"

namespace selfsr {

/// Everything needed to resume or run a trained network.
struct Checkpoint {
  Stage stage = Stage::kDegrade;
  std::int64_t iteration = 0;
  DegradeNetConfig degrade_net;
  std::int64_t disc_width = 32;
  SRNetConfig sr_net;
  ProgressiveState progress;
  ParamStore<float> params;
  AdamState<float> adam_g;
  AdamState<float> adam_d;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// FNV-1a digest of the architecture fields relevant to the stage.
std::uint64_t architecture_digest(Stage stage, const DegradeNetConfig& degrade_net, std::int64_t disc_width,
                                  const SRNetConfig& sr_net);
std::uint64_t architecture_digest(const Checkpoint& ckpt);

/// Binary layout (all integers little-endian):
///   "SFSR" | u32 version | u64 architecture digest |
///   records { u32 name_len | name bytes | u8 dtype | 4 x u32 dims | payload } |
///   u32 CRC32 of everything before it.
/// dtype: 1 = f32, 2 = f64, 3 = i64. Records are sorted by name.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Throws CheckpointError(kStageMismatch) unless `ckpt` was produced by the
/// stage family and architecture that `cfg` describes.
void require_compatible(const Checkpoint& ckpt, const TrainConfig& cfg);

}  // namespace selfsr

#endif  // SELFSR_CHECKPOINT_HPP_
