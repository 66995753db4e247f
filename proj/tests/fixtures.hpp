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

#ifndef SELFSR_TESTS_FIXTURES_HPP_
#define SELFSR_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <string>

#include <unistd.h>

#include "selfsr/data_io.hpp"
#include "selfsr/procedural.hpp"

namespace selfsr::fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() / ("selfsr_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// In-memory corpus of procedural faces. Paired modes derive LR by bicubic
/// downsampling; unpaired mode uses degraded renders of other faces.
inline DatasetIndex face_index(int count, int hr_size, int factor, PairingMode mode, std::uint64_t seed = 1) {
  DatasetIndex index;
  index.mode = mode;
  for (int i = 0; i < count; ++i) {
    ImageRecord hr;
    hr.id = "face_" + std::to_string(i);
    hr.pixels = render_face(hr_size, hr_size, seed * 1000 + i);
    hr.source_h = hr.source_w = hr_size;
    ImageRecord lr;
    lr.id = hr.id;
    lr.source_h = lr.source_w = hr_size;
    if (mode == PairingMode::kUnpaired) {
      lr.pixels = real_style_lr(render_face(hr_size, hr_size, seed * 1000 + 500 + i), factor, seed + i);
    } else {
      lr.pixels = synth_clean_lr(hr.pixels, factor);
    }
    index.hr_records.push_back(std::move(hr));
    index.lr_records.push_back(std::move(lr));
  }
  return index;
}

}  // namespace selfsr::fixture

#endif  // SELFSR_TESTS_FIXTURES_HPP_
