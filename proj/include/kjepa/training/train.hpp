// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "kjepa/models/networks.hpp"
#include "kjepa/synthgen/dataset.hpp"

namespace kjepa::training {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  double adam_eps = 1e-8;
  double ema_alpha = 0.996;
  std::uint64_t seed = 0;
  /// Validation loss is computed every `eval_every` epochs and always after the last.
  std::size_t eval_every = 1;
  /// Global gradient-norm clip; off unless set.
  std::optional<double> clip_norm;
  models::ModelConfig model;

  std::filesystem::path train_path;
  std::filesystem::path val_path;
  std::filesystem::path checkpoint_path;
  /// Continue from these weights (optimizer moments restart from zero).
  std::optional<std::filesystem::path> resume_from;
};

/// Throws ConfigError on out-of-range settings.
void validate(const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  /// NaN on epochs skipped by eval_every.
  double val_loss = 0.0;
  std::int64_t wall_ms = 0;
};

struct TrainHistory {
  /// Validation loss of the initial parameters, before any step.
  double initial_val_loss = 0.0;
  std::vector<EpochRecord> epochs;
};

/// `epoch=<n> train_loss=<f> val_loss=<f> ms=<n>`
std::string format_epoch(const EpochRecord& r);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains `params` in place on in-memory splits. The loss follows params.config.mode:
/// JEPA steps update encoder and predictor with Adam and then blend the EMA
/// encoder; AE steps update encoder and decoder.
/// A non-finite loss throws NumericError naming the global step index.
TrainHistory fit(models::ModelParams<float>& params, const synth::Dataset& train,
                 const synth::Dataset& val, const TrainConfig& cfg,
                 const EpochCallback& on_epoch = {});

/// Mean loss over every pair of `ds` in storage order. Parameters are not modified.
double evaluate(models::ModelParams<float>& params, const synth::Dataset& ds,
                std::size_t batch_size = 256);

struct TrainResult {
  models::ModelParams<float> params;
  TrainHistory history;
};

/// File-level drivers: read the splits, initialise (or resume), fit, write the checkpoint.
TrainResult train_jepa(const TrainConfig& cfg, const EpochCallback& on_epoch = {});
TrainResult train_ae(const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Loads `checkpoint` for `model` and evaluates it on the split at `split_path`.
double evaluate(const std::filesystem::path& checkpoint, const models::ModelConfig& model,
                const std::filesystem::path& split_path, std::size_t batch_size = 256);

}  // namespace kjepa::training
