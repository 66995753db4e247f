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

#ifndef SELFSR_PROCEDURAL_HPP_
#define SELFSR_PROCEDURAL_HPP_

#include <cstdint>
#include <filesystem>

#include "selfsr/tensor.hpp"

namespace selfsr {

/// Renders a synthetic face: background gradient, elliptical head with a
/// random hue, tilt and offset, two eyes and a mouth. (1, 3, h, w) in [-1, 1].
Tensor<float> render_face(std::int64_t h, std::int64_t w, std::uint64_t seed);

/// "Real-world" style low-resolution version of `hr`: short linear motion
/// blur, bicubic downsample by `factor`, additive Gaussian noise.
Tensor<float> real_style_lr(const Tensor<float>& hr, int factor, std::uint64_t seed, double noise_std = 0.04);

struct CorpusLayout {
  int count = 16;
  int hr_size = 64;
  int factor = 4;
  int test_every = 0;  // every k-th image goes to the "test" split; 0 keeps all in "train"
};

/// Writes root/hr/face_NNNN.png, root/lr/face_NNNN.png and root/manifest.tsv.
/// LR images are degraded renders of faces independent of the HR set.
void write_procedural_corpus(const std::filesystem::path& root, const CorpusLayout& layout, std::uint64_t seed);

}  // namespace selfsr

#endif  // SELFSR_PROCEDURAL_HPP_
