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

#include "selfsr/app.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "selfsr/degradation.hpp"
#include "selfsr/error.hpp"
#include "selfsr/srnet.hpp"

namespace selfsr {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Reads keys from one JSON object and rejects any key left unread.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + " must be a JSON object");
  }

  bool has(const std::string& key) {
    if (!j_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }

  void read(const std::string& key, double& out) {
    if (!has(key)) return;
    if (!j_[key].is_number()) throw type_error(key, "a number");
    out = j_[key].get<double>();
  }
  template <typename Int>
    requires std::is_integral_v<Int>
  void read(const std::string& key, Int& out) {
    if (!has(key)) return;
    if (!j_[key].is_number_integer()) throw type_error(key, "an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (j_[key].is_number_unsigned()) {
        out = j_[key].get<Int>();
      } else {
        const auto v = j_[key].get<std::int64_t>();
        if (v < 0) throw type_error(key, "a non-negative integer");
        out = static_cast<Int>(v);
      }
    } else {
      out = static_cast<Int>(j_[key].get<std::int64_t>());
    }
  }
  void read(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (!j_[key].is_string()) throw type_error(key, "a string");
    out = j_[key].get<std::string>();
  }
  void read(const std::string& key, std::vector<std::int64_t>& out) {
    if (!has(key)) return;
    if (!j_[key].is_array()) throw type_error(key, "an array of integers");
    out.clear();
    for (const auto& v : j_[key]) {
      if (!v.is_number_integer()) throw type_error(key, "an array of integers");
      out.push_back(v.get<std::int64_t>());
    }
  }
  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(j_[key], path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) {
        throw ConfigError("unknown key '" + (path_.empty() ? key : path_ + "." + key) + "' in run config");
      }
    }
  }

 private:
  std::string label() const { return path_.empty() ? "run config" : "'" + path_ + "'"; }
  ConfigError type_error(const std::string& key, const char* what) const {
    return ConfigError("'" + (path_.empty() ? key : path_ + "." + key) + "' must be " + what);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

PairingMode default_mode(Stage stage) {
  return stage == Stage::kSr ? PairingMode::kPairedSynthetic : PairingMode::kUnpaired;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Checkpoint load_for(const fs::path& path, bool sr_family) {
  Checkpoint ckpt = load_checkpoint(path);
  if (is_sr_stage(ckpt.stage) != sr_family) {
    throw CheckpointError(CheckpointError::Kind::kStageMismatch,
                          "checkpoint " + path.string() + " holds stage '" + std::string(to_string(ckpt.stage)) +
                              "', expected " + (sr_family ? "an SR stage" : "'degrade'"));
  }
  return ckpt;
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("run config is not valid JSON: ") + e.what());
  }
  RunConfig rc;
  TrainConfig& t = rc.train;
  Section root(doc, "");

  std::string text;
  if (!root.has("stage")) throw ConfigError("run config needs 'stage'");
  root.read("stage", text);
  t.stage = parse_stage(text);

  if (!root.has("output_dir")) throw ConfigError("run config needs 'output_dir'");
  root.read("output_dir", text);
  rc.output_dir = resolve(base_dir, text);

  if (!root.has("corpus")) throw ConfigError("run config needs 'corpus'");
  {
    Section c = root.child("corpus");
    if (!c.has("root")) throw ConfigError("'corpus.root' is required");
    c.read("root", text);
    rc.corpus.root = resolve(base_dir, text);
    if (c.has("lr_dir")) {
      c.read("lr_dir", text);
      rc.corpus.lr_dir = resolve(base_dir, text);
    }
    rc.corpus.mode = default_mode(t.stage);
    if (c.has("mode")) {
      c.read("mode", text);
      rc.corpus.mode = parse_pairing_mode(text);
    }
    c.read("split", rc.corpus.split);
    c.finish();
  }
  if (root.has("resume")) {
    root.read("resume", text);
    rc.resume = resolve(base_dir, text);
  }

  root.read("lr", t.lr);
  root.read("total_iters", t.total_iters);
  root.read("grow_steps", t.grow_steps);
  root.read("batch", t.batch);
  root.read("seed", t.seed);
  root.read("lambda_idt", t.stage1.identity);
  root.read("lambda_smooth", t.stage1.smooth);
  root.read("lambda_rec", t.stage2.rec);
  root.read("lambda_r1", t.stage2.r1);
  root.read("r1_gamma", t.r1_gamma);
  root.read("r1_interval", t.r1_interval);
  root.read("fade_steps", t.fade_steps);
  if (root.has("lr_decay")) {
    root.read("lr_decay", text);
    t.lr_decay = parse_lr_decay(text);
  }
  root.read("scale_factor", t.scale_factor);
  root.read("disc_width", t.disc_width);
  root.read("checkpoint_every", t.checkpoint_every);
  if (root.has("adam")) {
    Section a = root.child("adam");
    a.read("beta1", t.adam.beta1);
    a.read("beta2", t.adam.beta2);
    a.read("eps", t.adam.eps);
    a.finish();
  }
  if (root.has("degrade_net")) {
    Section d = root.child("degrade_net");
    d.read("base_width", t.degrade_net.base_width);
    d.read("max_disp", t.degrade_net.max_disp);
    d.finish();
  }
  if (root.has("sr_net")) {
    Section s = root.child("sr_net");
    s.read("base_width", t.sr_net.base_width);
    s.read("min_width", t.sr_net.min_width);
    s.read("blocks_per_level", t.sr_net.blocks_per_level);
    s.read("final_scale", t.sr_net.final_scale);
    s.read("eps", t.sr_net.eps);
    s.finish();
  }
  root.finish();

  rc.corpus.factor = static_cast<int>(is_sr_stage(t.stage) ? t.sr_net.final_scale : t.scale_factor);
  t.validate();
  return rc;
}

RunConfig load_run_config(const fs::path& path) {
  return parse_run_config(read_text(path), path.parent_path());
}

std::string run_config_to_json(const RunConfig& rc) {
  const TrainConfig& t = rc.train;
  json doc;
  doc["stage"] = std::string(to_string(t.stage));
  doc["output_dir"] = rc.output_dir.string();
  json corpus = {{"root", rc.corpus.root.string()}, {"mode", std::string(to_string(rc.corpus.mode))}};
  if (rc.corpus.lr_dir) corpus["lr_dir"] = rc.corpus.lr_dir->string();
  if (!rc.corpus.split.empty()) corpus["split"] = rc.corpus.split;
  doc["corpus"] = corpus;
  if (rc.resume) doc["resume"] = rc.resume->string();
  doc["lr"] = t.lr;
  doc["total_iters"] = t.total_iters;
  doc["grow_steps"] = t.grow_steps;
  doc["batch"] = t.batch;
  doc["seed"] = t.seed;
  doc["lambda_idt"] = t.stage1.identity;
  doc["lambda_smooth"] = t.stage1.smooth;
  doc["lambda_rec"] = t.stage2.rec;
  doc["lambda_r1"] = t.stage2.r1;
  doc["r1_gamma"] = t.r1_gamma;
  doc["r1_interval"] = t.r1_interval;
  doc["fade_steps"] = t.fade_steps;
  doc["lr_decay"] = std::string(to_string(t.lr_decay));
  doc["scale_factor"] = t.scale_factor;
  doc["disc_width"] = t.disc_width;
  doc["checkpoint_every"] = t.checkpoint_every;
  doc["adam"] = {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"eps", t.adam.eps}};
  doc["degrade_net"] = {{"base_width", t.degrade_net.base_width}, {"max_disp", t.degrade_net.max_disp}};
  doc["sr_net"] = {{"base_width", t.sr_net.base_width},
                   {"min_width", t.sr_net.min_width},
                   {"blocks_per_level", t.sr_net.blocks_per_level},
                   {"final_scale", t.sr_net.final_scale},
                   {"eps", t.sr_net.eps}};
  return doc.dump(2) + "\n";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (const auto* ce = dynamic_cast<const CheckpointError*>(&e)) {
    return ce->kind() == CheckpointError::Kind::kStageMismatch ? 2 : 3;
  }
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const ShapeError*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 3;
  return 1;
}

TrainResult train_command(const RunConfig& cfg, bool sr_family) {
  if (is_sr_stage(cfg.train.stage) != sr_family) {
    throw ConfigError("stage '" + std::string(to_string(cfg.train.stage)) + "' cannot be run by " +
                      (sr_family ? "train-sr" : "train-degrade"));
  }
  const DatasetIndex data = load_corpus(cfg.corpus);
  fs::create_directories(cfg.output_dir);
  {
    std::ofstream out(cfg.output_dir / "run_config.json");
    out << run_config_to_json(cfg);
  }
  TrainOptions opts;
  opts.out_dir = cfg.output_dir;
  if (cfg.resume) opts.resume = load_checkpoint(*cfg.resume);
  return sr_family ? run_stage2(cfg.train, data, opts) : run_stage1(cfg.train, data, opts);
}

DegradeResult degrade_forward(const Checkpoint& ckpt, const Tensor<float>& clean_lr, std::optional<double> perturb_std,
                              std::uint64_t seed) {
  if (is_sr_stage(ckpt.stage)) {
    throw CheckpointError(CheckpointError::Kind::kStageMismatch, "degrade needs a 'degrade' checkpoint");
  }
  NoGradGuard no_grad;
  const DegradationNet net(ckpt.degrade_net);
  const auto out = net.forward(ckpt.params, Variable<float>(clean_lr));
  DegradeResult result;
  result.degraded = out.degraded.value();
  if (perturb_std) result.perturbed = perturb_flow(out, *perturb_std, seed);
  return result;
}

std::size_t degrade_command(const fs::path& ckpt_path, const fs::path& in, const fs::path& out,
                            const DegradeOptions& opts) {
  const Checkpoint ckpt = load_for(ckpt_path, false);
  if (opts.downsample < 1) throw ConfigError("--downsample must be >= 1");
  const auto ids = list_pngs(in);
  if (ids.empty()) throw DataError("no PNG inputs under " + in.string());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Tensor<float> x = image_to_tensor(read_png(in / ids[i]));
    if (opts.downsample > 1) x = synth_clean_lr(x, opts.downsample);
    const auto r = degrade_forward(ckpt, x, opts.perturb_std, opts.seed + i);
    write_png(out / ids[i], tensor_to_image(r.degraded));
    if (r.perturbed) write_png(out / "perturbed" / ids[i], tensor_to_image(*r.perturbed));
  }
  return ids.size();
}

Tensor<float> superres_forward(const Checkpoint& ckpt, const Tensor<float>& lr) {
  if (!is_sr_stage(ckpt.stage)) {
    throw CheckpointError(CheckpointError::Kind::kStageMismatch, "superres needs an SR checkpoint");
  }
  NoGradGuard no_grad;
  const SrGenerator gen(ckpt.sr_net);
  return gen.forward(ckpt.params, Variable<float>(lr), ckpt.progress).value();
}

std::size_t superres_command(const fs::path& ckpt_path, const fs::path& in, const fs::path& out,
                             std::optional<int> scale) {
  const Checkpoint ckpt = load_for(ckpt_path, true);
  if (scale && *scale != ckpt.progress.scale()) {
    throw ConfigError("scale mismatch: requested x" + std::to_string(*scale) + " but the checkpoint produces x" +
                      std::to_string(ckpt.progress.scale()));
  }
  const auto ids = list_pngs(in);
  if (ids.empty()) throw DataError("no PNG inputs under " + in.string());
  for (const auto& id : ids) {
    const Tensor<float> lr = image_to_tensor(read_png(in / id));
    write_png(out / id, tensor_to_image(superres_forward(ckpt, lr)));
  }
  return ids.size();
}

Tensor<double> read_unit_image(const fs::path& path) {
  const Image8 img = read_png(path);
  Tensor<double> t(Shape{1, 3, img.height, img.width});
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) t.at(0, c, y, x) = img.pixels[(y * img.width + x) * 3 + c] / 255.0;
    }
  }
  return t;
}

MetricReport eval_command(const fs::path& pred, const fs::path& gt, const fs::path& out, const MetricOptions& opts) {
  const auto ids = list_pngs(gt);
  if (ids.empty()) throw DataError("no ground-truth PNGs under " + gt.string());
  MetricReport report;
  for (const auto& id : ids) {
    const fs::path p = pred / id;
    if (!fs::exists(p)) throw DataError("prediction missing for '" + id + "': " + p.string());
    const Tensor<double> a = read_unit_image(p);
    const Tensor<double> b = read_unit_image(gt / id);
    if (a.shape() != b.shape()) {
      throw DataError("size mismatch for '" + id + "': " + a.shape().str() + " vs " + b.shape().str());
    }
    report.add({id, psnr_y(a, b, opts), ssim_y(a, b, opts)});
  }
  report.finalize();
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  fs::path json_path = out, tsv_path = out;
  if (out.extension() == ".json") {
    tsv_path.replace_extension(".tsv");
  } else {
    json_path += ".json";
    tsv_path += ".tsv";
  }
  std::ofstream(json_path) << report.to_json();
  std::ofstream(tsv_path) << report.to_tsv();
  return report;
}

std::size_t dump_features_command(const fs::path& ckpt_path, const fs::path& image, int level, const fs::path& out) {
  const Checkpoint ckpt = load_for(ckpt_path, true);
  if (level < 1 || level > ckpt.progress.active_levels) {
    throw ConfigError("level " + std::to_string(level) + " is not active (checkpoint has " +
                      std::to_string(ckpt.progress.active_levels) + " level(s))");
  }
  const Tensor<float> lr = image_to_tensor(read_png(image));
  NoGradGuard no_grad;
  const SrGenerator gen(ckpt.sr_net);
  const auto maps = gen.condition_features(ckpt.params, Variable<float>(lr), level, ckpt.progress);
  for (std::size_t c = 0; c < maps.size(); ++c) {
    char name[32];
    std::snprintf(name, sizeof(name), "channel_%03zu.png", c);
    write_png(out / name, unit_map_to_gray(maps[c]));
  }
  return maps.size();
}

}  // namespace selfsr
