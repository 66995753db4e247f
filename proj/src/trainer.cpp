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

#include "selfsr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "selfsr/degradation.hpp"
#include "selfsr/error.hpp"
#include "selfsr/imageops.hpp"
#include "selfsr/srnet.hpp"

namespace selfsr {
namespace fs = std::filesystem;
namespace {

constexpr std::uint64_t kDataSeedSalt = 0xDA7A;
constexpr std::uint64_t kAugmentSeedSalt = 0xF11F;

class LossLog {
 public:
  LossLog(const std::optional<fs::path>& dir, bool append) {
    if (!dir) return;
    fs::create_directories(*dir);
    file_.open(*dir / "loss.tsv", append ? std::ios::app : std::ios::trunc);
    if (!file_) throw DataError("cannot write " + (*dir / "loss.tsv").string());
  }
  void add(std::int64_t iter, const std::string& name, double value) {
    rows_.push_back({iter, name, value});
    if (file_.is_open()) file_ << format_loss_row(rows_.back()) << '\n';
  }
  void flush() {
    if (file_.is_open()) file_.flush();
  }
  std::vector<LossRow> take() { return std::move(rows_); }

 private:
  std::ofstream file_;
  std::vector<LossRow> rows_;
};

class CheckpointWriter {
 public:
  CheckpointWriter(const std::optional<fs::path>& dir, std::int64_t every) : every_(every) {
    if (dir) dir_ = *dir / "checkpoints";
  }
  void maybe_write(const Checkpoint& ckpt, bool final) {
    if (!dir_) return;
    const bool periodic = every_ > 0 && ckpt.iteration % every_ == 0;
    if (!periodic && !final) return;
    fs::create_directories(*dir_);
    if (periodic) {
      char name[32];
      std::snprintf(name, sizeof(name), "iter_%06lld.sfsr", static_cast<long long>(ckpt.iteration));
      save_checkpoint(*dir_ / name, ckpt);
      files_.push_back(*dir_ / name);
    }
    if (final) {
      save_checkpoint(*dir_ / "final.sfsr", ckpt);
      files_.push_back(*dir_ / "final.sfsr");
    }
  }
  std::vector<fs::path> take() { return std::move(files_); }

 private:
  std::optional<fs::path> dir_;
  std::int64_t every_;
  std::vector<fs::path> files_;
};

Variable<float> weighted_sum(const Variable<float>& a, const Variable<float>& b, double wb) {
  return add(a, scale(b, wb));
}

double max_abs(const Tensor<float>& t) {
  double m = 0;
  for (float v : t.data()) m = std::max(m, static_cast<double>(std::abs(v)));
  return m;
}

Tensor<float> resize_tensor(const Tensor<float>& x, std::int64_t h, std::int64_t w) {
  if (x.shape().h() == h && x.shape().w() == w) return x;
  NoGradGuard no_grad;
  return resize(Variable<float>(x), h, w, ResizeKind::kBicubic).value();
}

Checkpoint start_checkpoint(const TrainConfig& cfg, const TrainOptions& opts) {
  Checkpoint ckpt;
  if (opts.resume) {
    require_compatible(*opts.resume, cfg);
    ckpt = *opts.resume;
    ckpt.stage = cfg.stage;
  } else {
    ckpt = initial_checkpoint(cfg);
  }
  ckpt.adam_g.hyper = cfg.adam;
  ckpt.adam_d.hyper = cfg.adam;
  return ckpt;
}

// Runs `body` for iterations [start, total) with numerical failures tagged by
// iteration, then writes the final checkpoint.
template <typename Body>
TrainResult train_loop(const TrainConfig& cfg, const TrainOptions& opts, Checkpoint ckpt, Body&& body) {
  LossLog log(opts.out_dir, opts.resume.has_value());
  CheckpointWriter writer(opts.out_dir, cfg.checkpoint_every);
  for (std::int64_t iter = ckpt.iteration; iter < cfg.total_iters; ++iter) {
    try {
      body(iter, ckpt, log);
    } catch (const NumericalError& e) {
      log.flush();
      throw NumericalError("training aborted at iteration " + std::to_string(iter + 1) + ": " + e.what());
    }
    ckpt.iteration = iter + 1;
    writer.maybe_write(ckpt, ckpt.iteration == cfg.total_iters);
  }
  log.flush();
  TrainResult result;
  result.checkpoint = std::move(ckpt);
  result.log = log.take();
  result.checkpoint_files = writer.take();
  return result;
}

}  // namespace

std::string format_loss_row(const LossRow& row) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", row.value);
  return std::to_string(row.iter) + "\t" + row.name + "\t" + buf;
}

double window_mean(const std::vector<LossRow>& log, const std::string& name, std::int64_t first, std::int64_t last) {
  double sum = 0;
  std::int64_t n = 0;
  for (const auto& row : log) {
    if (row.name == name && row.iter >= first && row.iter <= last) {
      sum += row.value;
      ++n;
    }
  }
  if (n == 0) throw Error("no '" + name + "' entries in iterations " + std::to_string(first) + ".." + std::to_string(last));
  return sum / static_cast<double>(n);
}

Checkpoint initial_checkpoint(const TrainConfig& cfg) {
  cfg.validate();
  Checkpoint ckpt;
  ckpt.stage = cfg.stage;
  ckpt.degrade_net = cfg.degrade_net;
  ckpt.disc_width = cfg.disc_width;
  ckpt.sr_net = cfg.sr_net;
  if (is_sr_stage(cfg.stage)) {
    ckpt.progress.final_scale = cfg.sr_net.final_scale;
    ckpt.progress.grow_steps = cfg.grow_steps;
    SrGenerator(cfg.sr_net).init(ckpt.params, cfg.seed);
    HrDiscriminator(cfg.sr_net).init(ckpt.params, cfg.seed);
  } else {
    DegradationNet(cfg.degrade_net).init(ckpt.params, cfg.seed);
    LrDiscriminator(cfg.disc_width).init(ckpt.params, cfg.seed);
  }
  ckpt.adam_g.hyper = cfg.adam;
  ckpt.adam_d.hyper = cfg.adam;
  return ckpt;
}

TrainResult run_stage1(const TrainConfig& cfg, const DatasetIndex& data, const TrainOptions& opts) {
  cfg.validate();
  if (cfg.stage != Stage::kDegrade) throw ConfigError("run_stage1 needs stage 'degrade'");
  const BatchStream stream(data, static_cast<int>(cfg.batch), cfg.seed ^ kDataSeedSalt);
  const DegradationNet gen(cfg.degrade_net);
  const LrDiscriminator disc(cfg.disc_width);
  const auto factor = static_cast<int>(cfg.scale_factor);

  auto body = [&](std::int64_t iter, Checkpoint& ckpt, LossLog& log) {
    ParamStore<float>& store = ckpt.params;
    PairBatch batch = stream.at_step(iter);
    hflip_augment(batch, data.mode, cfg.seed ^ kAugmentSeedSalt, iter);
    const Tensor<float> clean_t = synth_clean_lr(batch.hr, factor);
    if (clean_t.shape() != batch.lr.shape()) {
      throw DataError("clean LR " + clean_t.shape().str() + " and real LR " + batch.lr.shape().str() +
                      " differ; check scale_factor");
    }
    const Variable<float> clean(clean_t);
    const Variable<float> real(batch.lr);
    const double lr = learning_rate_at(cfg, iter);

    // Discriminator step on a generator output that carries no tape.
    Tensor<float> fake_t;
    {
      NoGradGuard no_grad;
      fake_t = gen.forward(store, clean).degraded.value();
    }
    const Variable<float> d_loss =
        lr_discriminator_loss(disc.forward(store, real), disc.forward(store, Variable<float>(fake_t)));
    adam_step(store, backward(d_loss, store, LrDiscriminator::kPrefix), ckpt.adam_d, lr, LrDiscriminator::kPrefix);

    // Generator step against the updated discriminator.
    const DegradationOutput<float> out = gen.forward(store, clean);
    const Variable<float> g_adv = lr_generator_loss(disc.forward(store, out.degraded));
    const Variable<float> idt = loss_identity(out.intermediate, clean);
    const Variable<float> smooth = loss_smooth(out.flow);
    const Variable<float> g_total = stage1_total(g_adv, idt, smooth, cfg.stage1);
    IterationStats stats;
    stats.iter = iter + 1;
    stats.output_shape = out.degraded.shape();
    stats.max_abs_flow = max_abs(out.flow.offsets.value());
    stats.degraded_equals_intermediate = out.degraded.value() == out.intermediate.value();
    stats.lr = lr;
    adam_step(store, backward(g_total, store, DegradationNet::kPrefix), ckpt.adam_g, lr, DegradationNet::kPrefix);

    stats.losses = {{"d_adv", d_loss.item()}, {"g_adv", g_adv.item()}, {"identity", idt.item()},
                    {"smooth", smooth.item()}, {"g_total", g_total.item()}, {"max_flow", stats.max_abs_flow}};
    for (const auto& [name, value] : stats.losses) log.add(stats.iter, name, value);
    if (opts.hooks.on_iteration) opts.hooks.on_iteration(stats);
  };
  return train_loop(cfg, opts, start_checkpoint(cfg, opts), body);
}

TrainResult run_stage2(const TrainConfig& cfg, const DatasetIndex& data, const TrainOptions& opts) {
  cfg.validate();
  if (!is_sr_stage(cfg.stage)) throw ConfigError("run_stage2 needs stage 'sr' or 'sr_unpaired'");
  const bool paired = cfg.stage == Stage::kSr;
  if (paired && data.mode == PairingMode::kUnpaired) throw ConfigError("stage 'sr' needs a paired corpus");
  const BatchStream stream(data, static_cast<int>(cfg.batch), cfg.seed ^ kDataSeedSalt);
  const SrGenerator gen(cfg.sr_net);
  const HrDiscriminator disc(cfg.sr_net);
  const int final_scale = cfg.sr_net.final_scale;
  {
    const Shape& lr = data.lr_records.front().pixels.shape();
    const Shape& hr = data.hr_records.front().pixels.shape();
    if (hr.h() != lr.h() * final_scale || hr.w() != lr.w() * final_scale) {
      throw ConfigError("scale mismatch: HR " + std::to_string(hr.h()) + "x" + std::to_string(hr.w()) + " is not x" +
                        std::to_string(final_scale) + " of LR " + std::to_string(lr.h()) + "x" +
                        std::to_string(lr.w()));
    }
  }
  std::int64_t last_grow = 0;

  auto body = [&](std::int64_t iter, Checkpoint& ckpt, LossLog& log) {
    ParamStore<float>& store = ckpt.params;
    ProgressiveState& state = ckpt.progress;
    for (std::size_t k = 0; k < cfg.grow_steps.size(); ++k) {
      if (cfg.grow_steps[k] != iter) continue;
      GrowEvent event;
      event.iter = iter;
      event.old_scale = state.scale();
      if (opts.hooks.on_grow) event.before = store;
      grow(state, store, gen, disc, cfg.seed);
      event.new_scale = state.scale();
      event.after = &store;
      last_grow = iter;
      if (opts.hooks.on_grow) opts.hooks.on_grow(event);
    }
    const int levels = state.active_levels;
    const double alpha =
        cfg.fade_steps > 0 && levels > 1
            ? std::min(1.0, static_cast<double>(iter - last_grow + 1) / static_cast<double>(cfg.fade_steps))
            : 1.0;

    PairBatch batch = stream.at_step(iter);
    hflip_augment(batch, data.mode, cfg.seed ^ kAugmentSeedSalt, iter);
    const Variable<float> lr_img(batch.lr);
    const std::int64_t out_h = batch.lr.shape().h() * state.scale();
    const std::int64_t out_w = batch.lr.shape().w() * state.scale();
    const Tensor<float> real_t = resize_tensor(batch.hr, out_h, out_w);
    const Variable<float> real(real_t);
    const double lr = learning_rate_at(cfg, iter);
    auto disc_fn = [&](const Variable<float>& x) { return disc.forward(store, x, levels); };

    Tensor<float> fake_t;
    {
      NoGradGuard no_grad;
      fake_t = gen.forward(store, lr_img, state, alpha).value();
    }
    const Variable<float> d_adv = hr_discriminator_loss(disc_fn(real), disc_fn(Variable<float>(fake_t)));
    Variable<float> d_total = d_adv;
    std::optional<double> r1_value;
    if (cfg.r1_interval > 0 && iter % cfg.r1_interval == 0) {
      const Variable<float> r1 = loss_r1<float>(disc_fn, real_t, cfg.r1_gamma);
      r1_value = r1.item();
      d_total = weighted_sum(d_adv, r1, cfg.stage2.r1);
    }
    adam_step(store, backward(d_total, store, HrDiscriminator::kPrefix), ckpt.adam_d, lr, HrDiscriminator::kPrefix);

    const Variable<float> fake = gen.forward(store, lr_img, state, alpha);
    const Variable<float> g_adv = hr_generator_loss(disc_fn(fake));
    const Variable<float> rec = paired ? loss_rec(real, fake) : loss_rec_cycle(fake, lr_img);
    const Variable<float> g_total = weighted_sum(g_adv, rec, cfg.stage2.rec);
    adam_step(store, backward(g_total, store, SrGenerator::kPrefix), ckpt.adam_g, lr, SrGenerator::kPrefix);

    IterationStats stats;
    stats.iter = iter + 1;
    stats.output_shape = fake.shape();
    stats.lr = lr;
    stats.active_levels = levels;
    stats.fade_alpha = alpha;
    stats.losses = {{"d_adv", d_adv.item()}, {"d_total", d_total.item()}, {"g_adv", g_adv.item()},
                    {"rec", rec.item()}, {"g_total", g_total.item()}, {"scale", state.scale()}};
    if (r1_value) stats.losses["r1"] = *r1_value;
    for (const auto& [name, value] : stats.losses) log.add(stats.iter, name, value);
    if (opts.hooks.on_iteration) opts.hooks.on_iteration(stats);
  };
  Checkpoint ckpt = start_checkpoint(cfg, opts);
  if (opts.resume) {
    for (auto g : cfg.grow_steps) {
      if (g < ckpt.iteration) last_grow = g;
    }
  }
  return train_loop(cfg, opts, std::move(ckpt), body);
}

}  // namespace selfsr
