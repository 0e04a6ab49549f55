// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace kjepa::synth {

inline constexpr std::uint32_t kDatasetVersion = 1;

/// One (context, target, label) training triple.
struct WindowPair {
  std::vector<float> context;
  std::vector<float> target;
  std::uint16_t regime_label = 0;
  std::uint32_t seq_index = 0;
};

/// context = s[0, context_len), target = s[delta, delta + context_len) of a
/// standardized master sequence.
WindowPair make_window_pair(std::span<const double> standardized, std::size_t context_len,
                            std::size_t delta, std::uint16_t label, std::uint32_t seq_index);

/// A split held in memory: windows stored back to back.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::uint32_t context_len, std::uint32_t target_len, std::uint32_t num_regimes)
      : context_len_(context_len), target_len_(target_len), num_regimes_(num_regimes) {}

  void push_back(const WindowPair& pair);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::uint32_t context_len() const noexcept { return context_len_; }
  std::uint32_t target_len() const noexcept { return target_len_; }
  std::uint32_t num_regimes() const noexcept { return num_regimes_; }

  std::span<const float> context(std::size_t i) const {
    return {contexts_.data() + i * context_len_, context_len_};
  }
  std::span<const float> target(std::size_t i) const {
    return {targets_.data() + i * target_len_, target_len_};
  }
  std::uint16_t label(std::size_t i) const { return labels_.at(i); }
  std::uint32_t seq_index(std::size_t i) const { return seq_indices_.at(i); }
  const std::vector<std::uint16_t>& labels() const noexcept { return labels_; }

  /// Pairs whose label satisfies `keep`, in original order.
  template <typename Pred>
  Dataset filter(Pred keep) const {
    Dataset out(context_len_, target_len_, num_regimes_);
    for (std::size_t i = 0; i < size(); ++i) {
      if (!keep(labels_[i])) continue;
      out.labels_.push_back(labels_[i]);
      out.seq_indices_.push_back(seq_indices_[i]);
      out.contexts_.insert(out.contexts_.end(), context(i).begin(), context(i).end());
      out.targets_.insert(out.targets_.end(), target(i).begin(), target(i).end());
    }
    return out;
  }

 private:
  std::uint32_t context_len_ = 0;
  std::uint32_t target_len_ = 0;
  std::uint32_t num_regimes_ = 0;
  std::vector<std::uint16_t> labels_;
  std::vector<std::uint32_t> seq_indices_;
  std::vector<float> contexts_;
  std::vector<float> targets_;
};

struct DataConfig {
  std::uint32_t seqs_per_regime = 500;
  std::uint64_t global_seed = 0;
  std::uint32_t master_len = 1024;
  std::uint32_t context_len = 768;
  std::uint32_t delta = 256;
  double train_frac = 0.7;
  double val_frac = 0.2;
  double test_frac = 0.1;
  std::filesystem::path out_dir = "data";
};

/// Throws ConfigError on geometry or fraction problems.
void validate(const DataConfig& cfg);

struct SplitCounts {
  std::uint32_t train = 0, val = 0, test = 0;
};
/// Per-regime counts: train = round(N * train_frac), val = round(N * val_frac), test = rest.
SplitCounts split_counts(const DataConfig& cfg);

struct DatasetFile {
  std::string split;
  std::filesystem::path path;
  std::uint32_t num_pairs = 0;
  std::uint64_t content_hash = 0;
};

struct DatasetFiles {
  DatasetFile train, val, test;
};

/// In-memory splits, ordered by (regime_id, seq_index) within each.
struct DatasetSplits {
  Dataset train, val, test;
};

DatasetSplits generate_splits(const DataConfig& cfg);

/// Generates all splits and writes `<out_dir>/{train,val,test}.kjd` plus a
/// `.manifest` sidecar for each.
DatasetFiles build_dataset(const DataConfig& cfg);

/// KJD1 encoding (little-endian):
///   "KJD1" u32 version u32 num_pairs u32 context_len u32 target_len u32 num_regimes
///   per pair: u16 label, u32 seq_index, context f32[], target f32[]
void write_dataset(const Dataset& ds, const std::filesystem::path& path);
/// Throws IoError on unreadable or malformed files.
Dataset read_dataset(const std::filesystem::path& path);

/// Sidecar manifest (key=value lines).
using Manifest = std::map<std::string, std::string>;
std::filesystem::path manifest_path(const std::filesystem::path& dataset_path);
void write_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

/// Reads the manifest next to a dataset file and rebuilds the DataConfig that produced it.
DataConfig config_from_manifest(const Manifest& m);

}  // namespace kjepa::synth
