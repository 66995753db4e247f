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

#ifndef SELFSR_DATA_IO_HPP_
#define SELFSR_DATA_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selfsr/tensor.hpp"

namespace selfsr {

/// Interleaved 8-bit image; channels is 1 (gray) or 3 (RGB).
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;
};

/// Decodes any PNG into 8-bit RGB. Throws DataError on failure.
Image8 read_png(const std::filesystem::path& path);
/// Writes an 8-bit gray or RGB PNG, creating parent directories.
void write_png(const std::filesystem::path& path, const Image8& img);

/// 8-bit code to [-1, 1] and back (rounded, clamped).
inline double from_unit_range(std::uint8_t v) { return v / 127.5 - 1.0; }
std::uint8_t to_unit_range(double v);

/// RGB image to a (1, 3, h, w) tensor in [-1, 1].
Tensor<float> image_to_tensor(const Image8& img);
/// Sample `n` of a (N, 3, h, w) tensor in [-1, 1] to an RGB image.
template <typename T>
Image8 tensor_to_image(const Tensor<T>& t, std::int64_t n = 0);
/// Single-channel map in [0, 1] (any shape with h, w as the last two dims and
/// numel == h * w) to a gray image.
template <typename T>
Image8 unit_map_to_gray(const Tensor<T>& t);

struct ImageRecord {
  std::string id;  // path relative to its corpus directory, '/'-separated
  Tensor<float> pixels;
  std::int64_t source_h = 0;
  std::int64_t source_w = 0;
};

enum class PairingMode { kPairedSynthetic, kUnpaired, kPseudoPaired };
std::string_view to_string(PairingMode mode);
PairingMode parse_pairing_mode(std::string_view text);

struct DatasetIndex {
  std::vector<ImageRecord> hr_records;
  std::vector<ImageRecord> lr_records;
  PairingMode mode = PairingMode::kPairedSynthetic;
};

/// Relative ids of every .png under `dir` (recursive), sorted bytewise.
std::vector<std::string> list_pngs(const std::filesystem::path& dir);
/// Reads every PNG under `dir` in list_pngs order.
std::vector<ImageRecord> load_records(const std::filesystem::path& dir);
/// Optional "id<TAB>split" manifest; a header line starting with "id" is
/// skipped. Returns an empty map when the file does not exist.
std::map<std::string, std::string> read_manifest(const std::filesystem::path& path);

struct CorpusSpec {
  std::filesystem::path root;              // holds hr/ and optionally lr/
  std::optional<std::filesystem::path> lr_dir;  // overrides root/lr
  PairingMode mode = PairingMode::kPairedSynthetic;
  int factor = 4;  // bicubic factor for paired_synthetic
  std::string split;  // when non-empty, keep only manifest rows with this split
};

/// Builds the index. paired_synthetic derives LR from HR; unpaired reads both
/// sets independently; pseudo_paired requires LR ids to match HR ids 1:1.
DatasetIndex load_corpus(const CorpusSpec& spec);

/// Bicubic downsample by `factor`; the image size must be divisible by it.
ImageRecord synth_clean_lr(const ImageRecord& hr, int factor);
Tensor<float> synth_clean_lr(const Tensor<float>& hr, int factor);

struct PairBatch {
  Tensor<float> lr;
  Tensor<float> hr;
  std::vector<std::size_t> lr_index;
  std::vector<std::size_t> hr_index;
};

/// Deterministic permutation of [0, n) for (seed, epoch, stream).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::int64_t epoch, std::uint64_t stream);

/// Epoch-seeded shuffled batches. Paired modes keep LR aligned with HR;
/// unpaired mode shuffles the two sets independently, each cycling through
/// its own epochs. Partial trailing batches are dropped.
class BatchStream {
 public:
  BatchStream(const DatasetIndex& index, int batch, std::uint64_t seed);

  std::int64_t batches_per_epoch() const;
  /// Batch number `b` (0-based) of `epoch`.
  PairBatch batch(std::int64_t epoch, std::int64_t b) const;
  /// Batch for a global step counter; steps run through epochs in order.
  PairBatch at_step(std::int64_t step) const;

 private:
  std::vector<std::size_t> pick(std::size_t n, std::int64_t step, std::uint64_t stream) const;

  const DatasetIndex* index_;
  int batch_;
  std::uint64_t seed_;
};

/// splitmix64 hash of (seed, iter, sample, stream), low bit as the flip flag.
bool flip_flag(std::uint64_t seed, std::int64_t iter, std::int64_t sample, std::uint64_t stream = 0);

/// Flips sample `n` of `t` in place.
void hflip_sample(Tensor<float>& t, std::int64_t n);

/// Flips each sample with probability 1/2, decided per (seed, iter, sample).
/// In paired modes LR and HR of one sample share the flag. `force` overrides
/// the random flag for every sample.
void hflip_augment(PairBatch& batch, PairingMode mode, std::uint64_t seed, std::int64_t iter,
                   std::optional<bool> force = std::nullopt);

}  // namespace selfsr

#endif  // SELFSR_DATA_IO_HPP_
