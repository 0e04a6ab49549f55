// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "kjepa/analysis/report.hpp"
#include "kjepa/cli/config.hpp"
#include "kjepa/synthgen/dataset.hpp"
#include "kjepa/training/train.hpp"

namespace kjepa::cli {

/// Writes the three splits under data.out_dir and prints one hash line per split.
synth::DatasetFiles run_gen(const ExperimentConfig& c, std::ostream& out);

struct TrainPaths {
  std::filesystem::path checkpoint;  ///< <out_dir>/<mode>.kjc
  std::filesystem::path initial;     ///< <out_dir>/<mode>.init.kjc, the untrained weights
  std::filesystem::path history;     ///< <out_dir>/<mode>.log, one epoch record per line
};

TrainPaths train_paths(const std::filesystem::path& out_dir, models::ModelMode mode);

/// Trains on data.out_dir/{train,val}.kjd, streaming epoch records to `out`.
training::TrainResult run_train(const ExperimentConfig& c, models::ModelMode mode,
                                const std::optional<std::filesystem::path>& resume,
                                std::ostream& out);

struct AnalyzeInputs {
  std::filesystem::path jepa;
  std::optional<std::filesystem::path> ae;
  /// Untrained reference weights; defaults to the `.init.kjc` sibling of `jepa`.
  std::optional<std::filesystem::path> jepa_init;
};

/// Full diagnostic suite on data.out_dir/test.kjd. Writes report.txt, report.json and the
/// embedding tables under analyze.out_dir.
analysis::AnalysisReport run_analyze(const ExperimentConfig& c, const AnalyzeInputs& in,
                                     std::ostream& out);

/// Prints the paper-comparison summary. Returns 0 when every threshold passes, else 1.
int run_report(const std::filesystem::path& report, std::ostream& out);

/// Per-layer and composite gradient checks. Returns 0 when all pass, else 1.
int run_gradcheck(const ExperimentConfig& c, std::uint64_t seed, std::ostream& out);

}  // namespace kjepa::cli
