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

#include "selfsr/checkpoint.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <string>

namespace selfsr {
namespace {

constexpr char kMagic[4] = {'S', 'F', 'S', 'R'};
constexpr std::uint8_t kF32 = 1;
constexpr std::uint8_t kF64 = 2;
constexpr std::uint8_t kI64 = 3;

std::size_t dtype_size(std::uint8_t tag) { return tag == kF32 ? 4 : 8; }

struct Record {
  std::uint8_t dtype = kF32;
  Shape shape{1, 1, 1, 1};
  std::vector<std::uint8_t> payload;
};

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename U>
U get_le(const std::uint8_t* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

class RecordSet {
 public:
  void put_f32(const std::string& name, const Tensor<float>& t) {
    Record r{kF32, t.shape(), {}};
    for (float v : t.data()) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      put_le(r.payload, bits);
    }
    records_[name] = std::move(r);
  }
  void put_f64(const std::string& name, double v) {
    Record r{kF64, Shape{1, 1, 1, 1}, {}};
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_le(r.payload, bits);
    records_[name] = std::move(r);
  }
  void put_i64s(const std::string& name, const std::vector<std::int64_t>& vs) {
    Record r{kI64, Shape{1, 1, 1, static_cast<std::int64_t>(vs.size())}, {}};
    for (std::int64_t v : vs) put_le(r.payload, static_cast<std::uint64_t>(v));
    records_[name] = std::move(r);
  }
  void put_i64(const std::string& name, std::int64_t v) { put_i64s(name, {v}); }

  const Record& get(const std::string& name, std::uint8_t dtype) const {
    auto it = records_.find(name);
    if (it == records_.end()) {
      throw CheckpointError(CheckpointError::Kind::kFormat, "checkpoint is missing record '" + name + "'");
    }
    if (it->second.dtype != dtype) {
      throw CheckpointError(CheckpointError::Kind::kFormat, "checkpoint record '" + name + "' has wrong dtype");
    }
    return it->second;
  }
  bool has(const std::string& name) const { return records_.count(name) != 0; }

  Tensor<float> f32(const std::string& name) const {
    const Record& r = get(name, kF32);
    Tensor<float> t(r.shape);
    for (std::int64_t i = 0; i < t.numel(); ++i) {
      const auto bits = get_le<std::uint32_t>(r.payload.data() + 4 * i);
      std::memcpy(&t[i], &bits, 4);
    }
    return t;
  }
  double f64(const std::string& name) const {
    const Record& r = get(name, kF64);
    const auto bits = get_le<std::uint64_t>(r.payload.data());
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::vector<std::int64_t> i64s(const std::string& name) const {
    const Record& r = get(name, kI64);
    std::vector<std::int64_t> out(static_cast<std::size_t>(r.shape.numel()));
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<std::int64_t>(get_le<std::uint64_t>(r.payload.data() + 8 * i));
    }
    return out;
  }
  std::int64_t i64(const std::string& name) const {
    auto v = i64s(name);
    if (v.size() != 1) throw CheckpointError(CheckpointError::Kind::kFormat, "record '" + name + "' is not a scalar");
    return v[0];
  }

  /// Names under `prefix`, with the prefix stripped.
  std::vector<std::string> suffixes(const std::string& prefix) const {
    std::vector<std::string> out;
    for (auto it = records_.lower_bound(prefix); it != records_.end(); ++it) {
      if (it->first.compare(0, prefix.size(), prefix) != 0) break;
      out.push_back(it->first.substr(prefix.size()));
    }
    return out;
  }

  const std::map<std::string, Record>& all() const { return records_; }
  void insert(std::string name, Record r) { records_[std::move(name)] = std::move(r); }

 private:
  std::map<std::string, Record> records_;
};

void put_adam(RecordSet& rs, const std::string& prefix, const AdamState<float>& st) {
  rs.put_i64(prefix + "steps", st.t);
  for (const auto& [name, mom] : st.moments) {
    rs.put_f32(prefix + "m/" + name, mom.m);
    rs.put_f32(prefix + "v/" + name, mom.v);
    rs.put_i64(prefix + "count/" + name, mom.t);
  }
}

AdamState<float> get_adam(const RecordSet& rs, const std::string& prefix) {
  AdamState<float> st;
  st.t = rs.i64(prefix + "steps");
  for (const auto& name : rs.suffixes(prefix + "m/")) {
    AdamMoments<float> mom;
    mom.m = rs.f32(prefix + "m/" + name);
    mom.v = rs.f32(prefix + "v/" + name);
    mom.t = rs.i64(prefix + "count/" + name);
    st.moments.emplace(name, std::move(mom));
  }
  return st;
}

// Parses the record section; nullopt if a record overruns `end`.
std::optional<RecordSet> parse_records(std::span<const std::uint8_t> bytes, std::size_t begin, std::size_t end) {
  RecordSet rs;
  std::size_t pos = begin;
  auto need = [&](std::size_t n) { return pos + n <= end; };
  while (pos < end) {
    if (!need(4)) return std::nullopt;
    const auto name_len = get_le<std::uint32_t>(bytes.data() + pos);
    pos += 4;
    if (!need(name_len + 1 + 16)) return std::nullopt;
    std::string name(reinterpret_cast<const char*>(bytes.data() + pos), name_len);
    pos += name_len;
    Record r;
    r.dtype = bytes[pos++];
    if (r.dtype != kF32 && r.dtype != kF64 && r.dtype != kI64) {
      throw CheckpointError(CheckpointError::Kind::kFormat, "unknown dtype tag in record '" + name + "'");
    }
    for (int d = 0; d < 4; ++d) {
      r.shape.dims[d] = get_le<std::uint32_t>(bytes.data() + pos);
      pos += 4;
    }
    const std::size_t payload = static_cast<std::size_t>(r.shape.numel()) * dtype_size(r.dtype);
    if (!need(payload)) return std::nullopt;
    r.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + payload));
    pos += payload;
    rs.insert(std::move(name), std::move(r));
  }
  return rs;
}

constexpr std::size_t kHeaderSize = 4 + 4 + 8;

}  // namespace

std::uint64_t architecture_digest(Stage stage, const DegradeNetConfig& degrade_net, std::int64_t disc_width,
                                  const SRNetConfig& sr_net) {
  std::string canon = "stage=" + std::string(is_sr_stage(stage) ? "sr" : "degrade");
  if (is_sr_stage(stage)) {
    canon += ";base=" + std::to_string(sr_net.base_width) + ";min=" + std::to_string(sr_net.min_width) +
             ";blocks=" + std::to_string(sr_net.blocks_per_level) +
             ";final_scale=" + std::to_string(sr_net.final_scale) + ";eps=" + std::to_string(sr_net.eps);
  } else {
    canon += ";base=" + std::to_string(degrade_net.base_width) + ";max_disp=" + std::to_string(degrade_net.max_disp) +
             ";disc=" + std::to_string(disc_width);
  }
  return fnv1a(canon);
}

std::uint64_t architecture_digest(const Checkpoint& ckpt) {
  return architecture_digest(ckpt.stage, ckpt.degrade_net, ckpt.disc_width, ckpt.sr_net);
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  RecordSet rs;
  rs.put_i64("meta/stage", static_cast<std::int64_t>(ckpt.stage));
  rs.put_i64("meta/iteration", ckpt.iteration);
  if (is_sr_stage(ckpt.stage)) {
    rs.put_i64("meta/sr.base_width", ckpt.sr_net.base_width);
    rs.put_i64("meta/sr.min_width", ckpt.sr_net.min_width);
    rs.put_i64("meta/sr.blocks_per_level", ckpt.sr_net.blocks_per_level);
    rs.put_i64("meta/sr.final_scale", ckpt.sr_net.final_scale);
    rs.put_f64("meta/sr.eps", ckpt.sr_net.eps);
    rs.put_i64("meta/progress.active_levels", ckpt.progress.active_levels);
    rs.put_i64s("meta/progress.grow_steps", ckpt.progress.grow_steps);
  } else {
    rs.put_i64("meta/degrade.base_width", ckpt.degrade_net.base_width);
    rs.put_f64("meta/degrade.max_disp", ckpt.degrade_net.max_disp);
    rs.put_i64("meta/disc.width", ckpt.disc_width);
  }
  for (const auto& [name, p] : ckpt.params.items()) {
    rs.put_f32("param/" + name, p.var.value());
    rs.put_f64("scale/" + name, p.scale);
  }
  put_adam(rs, "adam.g/", ckpt.adam_g);
  put_adam(rs, "adam.d/", ckpt.adam_d);

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le(out, kCheckpointVersion);
  put_le(out, architecture_digest(ckpt));
  for (const auto& [name, r] : rs.all()) {
    put_le(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    out.push_back(r.dtype);
    for (int d = 0; d < 4; ++d) put_le(out, static_cast<std::uint32_t>(r.shape.dims[d]));
    out.insert(out.end(), r.payload.begin(), r.payload.end());
  }
  const auto crc = static_cast<std::uint32_t>(::crc32(0L, out.data(), static_cast<uInt>(out.size())));
  put_le(out, crc);
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  using Kind = CheckpointError::Kind;
  if (bytes.size() < kHeaderSize + 4) throw CheckpointError(Kind::kTruncated, "checkpoint is truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw CheckpointError(Kind::kFormat, "not a checkpoint (bad magic)");
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kCheckpointVersion) {
    throw CheckpointError(Kind::kVersion, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto digest = get_le<std::uint64_t>(bytes.data() + 8);
  const std::size_t body_end = bytes.size() - 4;
  const auto stored_crc = get_le<std::uint32_t>(bytes.data() + body_end);
  const auto crc = static_cast<std::uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(body_end)));
  auto records = parse_records(bytes, kHeaderSize, body_end);
  if (crc != stored_crc) {
    if (!records) throw CheckpointError(Kind::kTruncated, "checkpoint is truncated");
    throw CheckpointError(Kind::kChecksum, "checkpoint checksum mismatch");
  }
  if (!records) throw CheckpointError(Kind::kFormat, "malformed checkpoint records");
  const RecordSet& rs = *records;

  Checkpoint ckpt;
  const auto stage = rs.i64("meta/stage");
  if (stage < 0 || stage > 2) throw CheckpointError(Kind::kFormat, "unknown stage in checkpoint");
  ckpt.stage = static_cast<Stage>(stage);
  ckpt.iteration = rs.i64("meta/iteration");
  if (is_sr_stage(ckpt.stage)) {
    ckpt.sr_net.base_width = rs.i64("meta/sr.base_width");
    ckpt.sr_net.min_width = rs.i64("meta/sr.min_width");
    ckpt.sr_net.blocks_per_level = static_cast<int>(rs.i64("meta/sr.blocks_per_level"));
    ckpt.sr_net.final_scale = static_cast<int>(rs.i64("meta/sr.final_scale"));
    ckpt.sr_net.eps = rs.f64("meta/sr.eps");
    ckpt.progress.active_levels = static_cast<int>(rs.i64("meta/progress.active_levels"));
    ckpt.progress.grow_steps = rs.i64s("meta/progress.grow_steps");
    ckpt.progress.final_scale = ckpt.sr_net.final_scale;
  } else {
    ckpt.degrade_net.base_width = rs.i64("meta/degrade.base_width");
    ckpt.degrade_net.max_disp = rs.f64("meta/degrade.max_disp");
    ckpt.disc_width = rs.i64("meta/disc.width");
  }
  if (architecture_digest(ckpt) != digest) {
    throw CheckpointError(Kind::kFormat, "checkpoint architecture digest does not match its metadata");
  }
  for (const auto& name : rs.suffixes("param/")) {
    ckpt.params.add(name, rs.f32("param/" + name), rs.f64("scale/" + name));
  }
  ckpt.adam_g = get_adam(rs, "adam.g/");
  ckpt.adam_d = get_adam(rs, "adam.d/");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Kind::kIo, "cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointError::Kind::kIo, "failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::kIo, "cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

void require_compatible(const Checkpoint& ckpt, const TrainConfig& cfg) {
  using Kind = CheckpointError::Kind;
  if (is_sr_stage(ckpt.stage) != is_sr_stage(cfg.stage)) {
    throw CheckpointError(Kind::kStageMismatch, "checkpoint stage '" + std::string(to_string(ckpt.stage)) +
                                                    "' does not match configured stage '" +
                                                    std::string(to_string(cfg.stage)) + "'");
  }
  if (architecture_digest(ckpt) != architecture_digest(cfg.stage, cfg.degrade_net, cfg.disc_width, cfg.sr_net)) {
    std::string detail;
    if (is_sr_stage(ckpt.stage) && ckpt.sr_net.final_scale != cfg.sr_net.final_scale) {
      detail = ": checkpoint final scale x" + std::to_string(ckpt.sr_net.final_scale) + ", configured x" +
               std::to_string(cfg.sr_net.final_scale);
    }
    throw CheckpointError(Kind::kStageMismatch, "checkpoint architecture does not match configuration" + detail);
  }
}

}  // namespace selfsr
