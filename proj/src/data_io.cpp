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

#include "selfsr/data_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "selfsr/error.hpp"
#include "selfsr/imageops.hpp"

namespace selfsr {
namespace fs = std::filesystem;

Image8 read_png(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw DataError("image not found: " + path.string());
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw DataError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  Image8 out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.channels = 3;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return out;
}

void write_png(const fs::path& path, const Image8& img) {
  if (img.channels != 1 && img.channels != 3) throw DataError("PNG output needs 1 or 3 channels");
  if (static_cast<std::size_t>(img.width) * img.height * img.channels != img.pixels.size()) {
    throw DataError("image buffer size does not match its dimensions");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels.data(), 0, nullptr)) {
    throw DataError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

std::uint8_t to_unit_range(double v) {
  const double code = std::round((v + 1.0) * 127.5);
  return static_cast<std::uint8_t>(std::clamp(code, 0.0, 255.0));
}

Tensor<float> image_to_tensor(const Image8& img) {
  if (img.channels != 3) throw DataError("expected an RGB image");
  Tensor<float> t(Shape{1, 3, img.height, img.width});
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        t.at(0, c, y, x) = static_cast<float>(from_unit_range(img.pixels[(y * img.width + x) * 3 + c]));
      }
    }
  }
  return t;
}

template <typename T>
Image8 tensor_to_image(const Tensor<T>& t, std::int64_t n) {
  const Shape& s = t.shape();
  if (s.c() != 3) throw ShapeError("tensor_to_image expects 3 channels, got " + s.str());
  if (n < 0 || n >= s.n()) throw ShapeError("sample index out of range");
  Image8 img;
  img.width = static_cast<int>(s.w());
  img.height = static_cast<int>(s.h());
  img.channels = 3;
  img.pixels.resize(static_cast<std::size_t>(s.h() * s.w() * 3));
  for (std::int64_t y = 0; y < s.h(); ++y) {
    for (std::int64_t x = 0; x < s.w(); ++x) {
      for (int c = 0; c < 3; ++c) {
        img.pixels[static_cast<std::size_t>((y * s.w() + x) * 3 + c)] = to_unit_range(t.at(n, c, y, x));
      }
    }
  }
  return img;
}

template <typename T>
Image8 unit_map_to_gray(const Tensor<T>& t) {
  const Shape& s = t.shape();
  if (s.h() * s.w() != t.numel()) throw ShapeError("unit_map_to_gray expects a single map, got " + s.str());
  Image8 img;
  img.width = static_cast<int>(s.w());
  img.height = static_cast<int>(s.h());
  img.channels = 1;
  img.pixels.resize(static_cast<std::size_t>(t.numel()));
  for (std::int64_t i = 0; i < t.numel(); ++i) {
    img.pixels[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(std::clamp(std::round(static_cast<double>(t[i]) * 255.0), 0.0, 255.0));
  }
  return img;
}

std::string_view to_string(PairingMode mode) {
  switch (mode) {
    case PairingMode::kPairedSynthetic:
      return "paired_synthetic";
    case PairingMode::kUnpaired:
      return "unpaired";
    case PairingMode::kPseudoPaired:
      return "pseudo_paired";
  }
  return "?";
}

PairingMode parse_pairing_mode(std::string_view text) {
  if (text == "paired_synthetic") return PairingMode::kPairedSynthetic;
  if (text == "unpaired") return PairingMode::kUnpaired;
  if (text == "pseudo_paired") return PairingMode::kPseudoPaired;
  throw ConfigError("unknown pairing mode '" + std::string(text) + "'");
}

std::vector<std::string> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("corpus directory not found: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext != ".png") continue;
    ids.push_back(fs::relative(entry.path(), dir).generic_string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<ImageRecord> load_records(const fs::path& dir) {
  std::vector<ImageRecord> out;
  for (const auto& id : list_pngs(dir)) {
    ImageRecord rec;
    rec.id = id;
    rec.pixels = image_to_tensor(read_png(dir / id));
    rec.source_h = rec.pixels.shape().h();
    rec.source_w = rec.pixels.shape().w();
    out.push_back(std::move(rec));
  }
  return out;
}

std::map<std::string, std::string> read_manifest(const fs::path& path) {
  std::map<std::string, std::string> rows;
  if (!fs::exists(path)) return rows;
  std::ifstream in(path);
  if (!in) throw DataError("cannot read manifest " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("manifest " + path.string() + ":" + std::to_string(lineno) + ": expected id<TAB>split");
    }
    std::string id = line.substr(0, tab);
    if (lineno == 1 && id == "id") continue;
    rows[id] = line.substr(tab + 1);
  }
  return rows;
}

namespace {

void filter_split(std::vector<ImageRecord>& recs, const std::map<std::string, std::string>& manifest,
                  const std::string& split) {
  if (split.empty() || manifest.empty()) return;
  std::erase_if(recs, [&](const ImageRecord& r) {
    auto it = manifest.find(r.id);
    return it == manifest.end() || it->second != split;
  });
}

}  // namespace

DatasetIndex load_corpus(const CorpusSpec& spec) {
  DatasetIndex index;
  index.mode = spec.mode;
  const auto manifest = read_manifest(spec.root / "manifest.tsv");
  index.hr_records = load_records(spec.root / "hr");
  filter_split(index.hr_records, manifest, spec.split);
  if (index.hr_records.empty()) throw DataError("no HR images under " + (spec.root / "hr").string());
  const fs::path lr_dir = spec.lr_dir.value_or(spec.root / "lr");
  switch (spec.mode) {
    case PairingMode::kPairedSynthetic:
      for (const auto& hr : index.hr_records) index.lr_records.push_back(synth_clean_lr(hr, spec.factor));
      break;
    case PairingMode::kUnpaired:
      index.lr_records = load_records(lr_dir);
      if (index.lr_records.empty()) throw DataError("no LR images under " + lr_dir.string());
      break;
    case PairingMode::kPseudoPaired: {
      auto lr = load_records(lr_dir);
      std::map<std::string, ImageRecord*> by_id;
      for (auto& r : lr) by_id[r.id] = &r;
      for (const auto& hr : index.hr_records) {
        auto it = by_id.find(hr.id);
        if (it == by_id.end()) throw DataError("pseudo pair missing LR image for '" + hr.id + "' in " + lr_dir.string());
        index.lr_records.push_back(*it->second);
      }
      break;
    }
  }
  return index;
}

Tensor<float> synth_clean_lr(const Tensor<float>& hr, int factor) {
  const Shape& s = hr.shape();
  if (factor < 1 || s.h() % factor != 0 || s.w() % factor != 0) {
    throw DataError("image " + std::to_string(s.h()) + "x" + std::to_string(s.w()) + " is not divisible by factor " +
                    std::to_string(factor));
  }
  NoGradGuard no_grad;
  return resize(Variable<float>(hr), s.h() / factor, s.w() / factor, ResizeKind::kBicubic).value();
}

ImageRecord synth_clean_lr(const ImageRecord& hr, int factor) {
  ImageRecord out;
  out.id = hr.id;
  out.pixels = synth_clean_lr(hr.pixels, factor);
  out.source_h = hr.source_h;
  out.source_w = hr.source_w;
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b) ^ c);
}

constexpr std::uint64_t kHrStream = 0x4852;
constexpr std::uint64_t kLrStream = 0x4C52;

Tensor<float> gather(const std::vector<ImageRecord>& recs, const std::vector<std::size_t>& idx) {
  std::vector<Tensor<float>> items;
  items.reserve(idx.size());
  for (auto i : idx) items.push_back(recs[i].pixels);
  return stack_batch<float>(items);
}

}  // namespace

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::int64_t epoch, std::uint64_t stream) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(epoch), stream, 0));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

BatchStream::BatchStream(const DatasetIndex& index, int batch, std::uint64_t seed)
    : index_(&index), batch_(batch), seed_(seed) {
  if (batch < 1) throw ConfigError("batch size must be >= 1");
  if (index.hr_records.empty() || index.lr_records.empty()) throw DataError("cannot batch an empty dataset index");
  if (index.mode != PairingMode::kUnpaired && index.hr_records.size() != index.lr_records.size()) {
    throw DataError("paired index has mismatched LR/HR counts");
  }
  const auto smallest = std::min(index.hr_records.size(), index.lr_records.size());
  if (smallest < static_cast<std::size_t>(batch)) {
    throw DataError("dataset of " + std::to_string(smallest) + " images is smaller than batch " +
                    std::to_string(batch));
  }
}

std::int64_t BatchStream::batches_per_epoch() const {
  return static_cast<std::int64_t>(index_->hr_records.size()) / batch_;
}

std::vector<std::size_t> BatchStream::pick(std::size_t n, std::int64_t step, std::uint64_t stream) const {
  const std::int64_t per_epoch = static_cast<std::int64_t>(n) / batch_;
  const std::int64_t epoch = step / per_epoch;
  const std::int64_t b = step % per_epoch;
  const auto order = epoch_order(n, seed_, epoch, stream);
  return {order.begin() + b * batch_, order.begin() + (b + 1) * batch_};
}

PairBatch BatchStream::batch(std::int64_t epoch, std::int64_t b) const {
  if (b < 0 || b >= batches_per_epoch()) throw DataError("batch index out of range");
  return at_step(epoch * batches_per_epoch() + b);
}

PairBatch BatchStream::at_step(std::int64_t step) const {
  PairBatch out;
  out.hr_index = pick(index_->hr_records.size(), step, kHrStream);
  out.lr_index =
      index_->mode == PairingMode::kUnpaired ? pick(index_->lr_records.size(), step, kLrStream) : out.hr_index;
  out.hr = gather(index_->hr_records, out.hr_index);
  out.lr = gather(index_->lr_records, out.lr_index);
  return out;
}

bool flip_flag(std::uint64_t seed, std::int64_t iter, std::int64_t sample, std::uint64_t stream) {
  return (mix(seed, static_cast<std::uint64_t>(iter), static_cast<std::uint64_t>(sample), stream) & 1u) != 0;
}

void hflip_sample(Tensor<float>& t, std::int64_t n) {
  const Shape& s = t.shape();
  for (std::int64_t c = 0; c < s.c(); ++c) {
    for (std::int64_t y = 0; y < s.h(); ++y) {
      float* row = &t.at(n, c, y, 0);
      std::reverse(row, row + s.w());
    }
  }
}

void hflip_augment(PairBatch& batch, PairingMode mode, std::uint64_t seed, std::int64_t iter,
                   std::optional<bool> force) {
  const bool joint = mode != PairingMode::kUnpaired;
  for (std::int64_t n = 0; n < batch.hr.shape().n(); ++n) {
    if (force.value_or(flip_flag(seed, iter, n, kHrStream))) hflip_sample(batch.hr, n);
  }
  for (std::int64_t n = 0; n < batch.lr.shape().n(); ++n) {
    const std::uint64_t stream = joint ? kHrStream : kLrStream;
    if (force.value_or(flip_flag(seed, iter, n, stream))) hflip_sample(batch.lr, n);
  }
}

template Image8 tensor_to_image<float>(const Tensor<float>&, std::int64_t);
template Image8 tensor_to_image<double>(const Tensor<double>&, std::int64_t);
template Image8 unit_map_to_gray<float>(const Tensor<float>&);
template Image8 unit_map_to_gray<double>(const Tensor<double>&);

}  // namespace selfsr
