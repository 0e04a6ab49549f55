// SPDX-License-Identifier: Apache-2.0
#include "kjepa/training/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "kjepa/errors.hpp"
#include "kjepa/models/checkpoint.hpp"
#include "kjepa/numerics/optim.hpp"
#include "kjepa/rng.hpp"

namespace kjepa::training {

namespace fs = std::filesystem;
using models::ModelMode;
using models::ModelParams;
using models::Window;

namespace {

void check_geometry(const models::ModelConfig& model, const synth::Dataset& ds,
                    std::string_view what) {
  if (ds.empty()) throw ConfigError(std::string(what) + " split is empty");
  if (ds.context_len() != model.input_len || ds.target_len() != model.input_len)
    throw ConfigError(std::string(what) + " split has window length " +
                      std::to_string(ds.context_len()) + ", model expects " +
                      std::to_string(model.input_len));
}

Tape<float>::Var batch_loss(Tape<float>& tape, ModelParams<float>& params,
                            const synth::Dataset& ds, std::span<const std::size_t> idx) {
  const Tensor<float> ctx = models::gather_batch<float>(ds, idx, Window::context);
  if (params.config.mode == ModelMode::ae) return models::ae_loss(tape, params, ctx);
  const Tensor<float> tgt = models::gather_batch<float>(ds, idx, Window::target);
  return models::jepa_loss(tape, params, ctx, tgt);
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  return hash64(seed, 0x5348'5546ULL, epoch);
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(cfg.ema_alpha > 0.0 && cfg.ema_alpha <= 1.0))
    throw ConfigError("ema_alpha must lie in (0, 1]");
  if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr)) throw ConfigError("lr must be finite and >= 0");
  if (!(cfg.adam_eps > 0.0) || !std::isfinite(cfg.adam_eps)) throw ConfigError("adam_eps must be finite and > 0");
  if (cfg.eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (cfg.clip_norm && !(*cfg.clip_norm > 0.0)) throw ConfigError("clip_norm must be > 0");
  models::validate(cfg.model);
}

std::string format_epoch(const EpochRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "epoch=%zu train_loss=%.9g val_loss=%.9g ms=%lld", r.epoch,
                r.train_loss, r.val_loss, static_cast<long long>(r.wall_ms));
  return buf;
}

double evaluate(ModelParams<float>& params, const synth::Dataset& ds, std::size_t batch_size) {
  check_geometry(params.config, ds, "evaluation");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  double total = 0.0;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, idx.size() - start);
    Tape<float> tape(Tape<float>::Mode::inference);
    auto loss = batch_loss(tape, params, ds, std::span(idx).subspan(start, n));
    total += static_cast<double>(tape.value(loss)[0]) * static_cast<double>(n);
  }
  return total / static_cast<double>(idx.size());
}

TrainHistory fit(ModelParams<float>& params, const synth::Dataset& train,
                 const synth::Dataset& val, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  validate(cfg);
  check_geometry(params.config, train, "training");
  check_geometry(params.config, val, "validation");
  const bool jepa = params.config.mode == ModelMode::jepa;
  if (jepa && params.ema.empty()) throw ContractError("JEPA parameters lack an EMA encoder");

  AdamState<float> adam(AdamConfig{.lr = cfg.lr, .eps = cfg.adam_eps});
  TrainHistory history;
  history.initial_val_loss = evaluate(params, val, cfg.batch_size);

  std::vector<std::size_t> order(train.size());
  std::int64_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng rng(epoch_seed(cfg.seed, epoch));
    shuffle(order, rng);

    double sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++step) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - start);
      Tape<float> tape;
      double loss = 0.0;
      try {
        auto l = batch_loss(tape, params, train, std::span(order).subspan(start, n));
        loss = tape.value(l)[0];
        tape.backward(l);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at step " + std::to_string(step) + " (epoch " +
                           std::to_string(epoch) + "): " + e.what());
      }
      if (cfg.clip_norm) clip_grad_norm(params.online, *cfg.clip_norm);
      adam_step(adam, params.online);
      if (jepa) ema_update(params.ema, params.online, cfg.ema_alpha, "encoder.");
      sum += loss * static_cast<double>(n);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = sum / static_cast<double>(order.size());
    rec.val_loss = (epoch % cfg.eval_every == 0 || epoch == cfg.epochs)
                       ? evaluate(params, val, cfg.batch_size)
                       : std::nan("");
    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

namespace {

TrainResult run(const TrainConfig& cfg, ModelMode mode, const EpochCallback& on_epoch) {
  validate(cfg);
  models::ModelConfig model = cfg.model;
  model.mode = mode;
  const synth::Dataset train = synth::read_dataset(cfg.train_path);
  const synth::Dataset val = synth::read_dataset(cfg.val_path);
  TrainResult out{cfg.resume_from ? models::load_checkpoint(*cfg.resume_from, model)
                                  : models::init_params<float>(model, cfg.seed),
                  {}};
  out.history = fit(out.params, train, val, cfg, on_epoch);
  if (!cfg.checkpoint_path.empty()) models::save_checkpoint(out.params, cfg.checkpoint_path);
  return out;
}

}  // namespace

TrainResult train_jepa(const TrainConfig& cfg, const EpochCallback& on_epoch) {
  return run(cfg, ModelMode::jepa, on_epoch);
}

TrainResult train_ae(const TrainConfig& cfg, const EpochCallback& on_epoch) {
  return run(cfg, ModelMode::ae, on_epoch);
}

double evaluate(const fs::path& checkpoint, const models::ModelConfig& model,
                const fs::path& split_path, std::size_t batch_size) {
  ModelParams<float> params = models::load_checkpoint(checkpoint, model);
  return evaluate(params, synth::read_dataset(split_path), batch_size);
}

}  // namespace kjepa::training
