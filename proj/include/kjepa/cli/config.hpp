// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "kjepa/analysis/embeddings.hpp"
#include "kjepa/models/config.hpp"
#include "kjepa/synthgen/dataset.hpp"

namespace kjepa::cli {

struct TrainSection {
  std::size_t epochs = 30;
  std::size_t batch = 256;
  double lr = 1e-3;
  double adam_eps = 1e-8;
  double ema_alpha = 0.996;
  std::uint64_t seed = 0;
  std::size_t eval_every = 1;
  std::optional<double> clip_norm;
  std::filesystem::path out_dir = "runs";
};

struct AnalyzeSection {
  std::size_t kmeans_restarts = 10;
  std::uint64_t kmeans_seed = 0;
  analysis::Encoder encoder = analysis::Encoder::online;
  std::size_t decomposition_draws = 8;
  std::filesystem::path out_dir = "runs";
};

/// Everything a run needs. model.mode is chosen per command, not by the file.
struct ExperimentConfig {
  synth::DataConfig data;
  models::ModelConfig model;
  TrainSection train;
  AnalyzeSection analyze;
};

/// Sectioned key = value text:
///
///   # comment
///   [data]
///   seqs_per_regime = 500
///
/// Sections: data, model, train, analyze. Keys not set keep their defaults.
/// Unknown sections or keys, duplicates and malformed values throw ParseError
/// carrying the line number and the offending key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every key with its resolved value; parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& c);

/// Cross-field checks (geometry, fractions, ranges). Throws ConfigError.
void validate(const ExperimentConfig& c);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace kjepa::cli
