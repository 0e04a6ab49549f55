// SPDX-License-Identifier: Apache-2.0
#include "kjepa/synthgen/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "common/binary_io.hpp"
#include "kjepa/errors.hpp"
#include "kjepa/hash.hpp"
#include "kjepa/rng.hpp"
#include "kjepa/synthgen/generator.hpp"

namespace kjepa::synth {

namespace fs = std::filesystem;

WindowPair make_window_pair(std::span<const double> s, std::size_t context_len, std::size_t delta,
                            std::uint16_t label, std::uint32_t seq_index) {
  if (delta + context_len > s.size())
    throw ConfigError("make_window_pair: delta + context_len exceeds sequence length");
  WindowPair p;
  p.context.assign(context_len, 0.0f);
  p.target.assign(context_len, 0.0f);
  for (std::size_t i = 0; i < context_len; ++i) {
    p.context[i] = static_cast<float>(s[i]);
    p.target[i] = static_cast<float>(s[delta + i]);
  }
  p.regime_label = label;
  p.seq_index = seq_index;
  return p;
}

void Dataset::push_back(const WindowPair& pair) {
  if (pair.context.size() != context_len_ || pair.target.size() != target_len_)
    throw DimensionError("dataset: window length mismatch");
  labels_.push_back(pair.regime_label);
  seq_indices_.push_back(pair.seq_index);
  contexts_.insert(contexts_.end(), pair.context.begin(), pair.context.end());
  targets_.insert(targets_.end(), pair.target.begin(), pair.target.end());
}

void validate(const DataConfig& cfg) {
  if (cfg.seqs_per_regime < 10) throw ConfigError("seqs_per_regime must be >= 10");
  if (cfg.context_len == 0 || cfg.delta == 0) throw ConfigError("context_len and delta must be > 0");
  if (static_cast<std::uint64_t>(cfg.delta) + cfg.context_len > cfg.master_len)
    throw ConfigError("delta + context_len must not exceed master_len");
  for (double f : {cfg.train_frac, cfg.val_frac, cfg.test_frac})
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("split fractions must lie in [0, 1]");
  if (std::fabs(cfg.train_frac + cfg.val_frac + cfg.test_frac - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");
}

SplitCounts split_counts(const DataConfig& cfg) {
  const double n = cfg.seqs_per_regime;
  SplitCounts c;
  c.train = static_cast<std::uint32_t>(std::lround(n * cfg.train_frac));
  c.val = static_cast<std::uint32_t>(std::lround(n * cfg.val_frac));
  if (c.train + c.val > cfg.seqs_per_regime) c.val = cfg.seqs_per_regime - c.train;
  c.test = cfg.seqs_per_regime - c.train - c.val;
  return c;
}

DatasetSplits generate_splits(const DataConfig& cfg) {
  validate(cfg);
  const std::size_t per = cfg.seqs_per_regime;
  const std::size_t total = per * kNumRegimes;
  std::vector<WindowPair> pairs(total);

  GenerateOptions opts;
  opts.length = cfg.master_len;
  const auto n = static_cast<std::int64_t>(total);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const int rid = static_cast<int>(idx / per);
    const auto s = static_cast<std::uint32_t>(idx % per);
    const MasterSequence m = generate_master(regime(rid), cfg.global_seed, s, opts);
    pairs[idx] = make_window_pair(standardize(m.values), cfg.context_len, cfg.delta,
                                  static_cast<std::uint16_t>(rid), s);
  }

  const SplitCounts c = split_counts(cfg);
  DatasetSplits out{Dataset(cfg.context_len, cfg.context_len, kNumRegimes),
                    Dataset(cfg.context_len, cfg.context_len, kNumRegimes),
                    Dataset(cfg.context_len, cfg.context_len, kNumRegimes)};
  for (std::size_t idx = 0; idx < total; ++idx) {
    const std::size_t s = idx % per;
    Dataset& dst = s < c.train ? out.train : (s < c.train + c.val ? out.val : out.test);
    dst.push_back(pairs[idx]);
  }
  return out;
}

using detail::Reader;
using detail::Writer;

void write_dataset(const Dataset& ds, const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  Writer w(os);
  w.bytes("KJD1", 4);
  w.le<std::uint32_t>(kDatasetVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(ds.size()));
  w.le<std::uint32_t>(ds.context_len());
  w.le<std::uint32_t>(ds.target_len());
  w.le<std::uint32_t>(ds.num_regimes());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    w.le<std::uint16_t>(ds.label(i));
    w.le<std::uint32_t>(ds.seq_index(i));
    w.f32s(ds.context(i));
    w.f32s(ds.target(i));
  }
  if (!os) throw IoError("write failed: " + path.string());
}

Dataset read_dataset(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  Reader r(is, path.string());
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "KJD1", 4) != 0) throw IoError(path.string() + ": not a KJD1 file");
  const auto version = r.le<std::uint32_t>();
  if (version != kDatasetVersion)
    throw IoError(path.string() + ": unsupported version " + std::to_string(version));
  const auto n = r.le<std::uint32_t>();
  const auto clen = r.le<std::uint32_t>();
  const auto tlen = r.le<std::uint32_t>();
  const auto nreg = r.le<std::uint32_t>();
  if (clen == 0 || tlen == 0 || nreg == 0 || nreg > 65536)
    throw IoError(path.string() + ": invalid header");
  Dataset ds(clen, tlen, nreg);
  WindowPair p;
  p.context.resize(clen);
  p.target.resize(tlen);
  for (std::uint32_t i = 0; i < n; ++i) {
    p.regime_label = r.le<std::uint16_t>();
    p.seq_index = r.le<std::uint32_t>();
    if (p.regime_label >= nreg) throw IoError(path.string() + ": label out of range");
    r.f32s(p.context);
    r.f32s(p.target);
    ds.push_back(p);
  }
  if (is.peek() != std::char_traits<char>::eof())
    throw IoError(path.string() + ": trailing bytes after " + std::to_string(n) + " pairs");
  return ds;
}

fs::path manifest_path(const fs::path& dataset_path) {
  fs::path p = dataset_path;
  p += ".manifest";
  return p;
}

void write_manifest(const Manifest& m, const fs::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  for (const auto& [k, v] : m) os << k << '=' << v << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  Manifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value in " + path.string(), lineno);
    m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

DataConfig config_from_manifest(const Manifest& m) {
  auto get = [&](const char* key) -> const std::string& {
    auto it = m.find(key);
    if (it == m.end()) throw ConfigError(std::string("manifest lacks '") + key + "'");
    return it->second;
  };
  DataConfig c;
  c.global_seed = std::stoull(get("global_seed"));
  c.seqs_per_regime = static_cast<std::uint32_t>(std::stoul(get("seqs_per_regime")));
  c.master_len = static_cast<std::uint32_t>(std::stoul(get("master_len")));
  c.context_len = static_cast<std::uint32_t>(std::stoul(get("context_len")));
  c.delta = static_cast<std::uint32_t>(std::stoul(get("delta")));
  c.train_frac = std::stod(get("train_frac"));
  c.val_frac = std::stod(get("val_frac"));
  c.test_frac = std::stod(get("test_frac"));
  return c;
}

DatasetFiles build_dataset(const DataConfig& cfg) {
  DatasetSplits splits = generate_splits(cfg);
  fs::create_directories(cfg.out_dir);

  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  auto emit = [&](const Dataset& ds, const char* split) {
    DatasetFile f;
    f.split = split;
    f.path = cfg.out_dir / (std::string(split) + ".kjd");
    f.num_pairs = static_cast<std::uint32_t>(ds.size());
    write_dataset(ds, f.path);
    f.content_hash = hash_file(f.path);
    Manifest m{
        {"format", "KJD1"},
        {"version", std::to_string(kDatasetVersion)},
        {"split", split},
        {"num_pairs", std::to_string(f.num_pairs)},
        {"global_seed", std::to_string(cfg.global_seed)},
        {"seqs_per_regime", std::to_string(cfg.seqs_per_regime)},
        {"master_len", std::to_string(cfg.master_len)},
        {"context_len", std::to_string(cfg.context_len)},
        {"delta", std::to_string(cfg.delta)},
        {"train_frac", fmt(cfg.train_frac)},
        {"val_frac", fmt(cfg.val_frac)},
        {"test_frac", fmt(cfg.test_frac)},
        {"generator", std::string(kGeneratorVersion) + "/" + CounterRng::kName},
        {"content_hash", hex64(f.content_hash)},
    };
    write_manifest(m, manifest_path(f.path));
    return f;
  };
  return DatasetFiles{emit(splits.train, "train"), emit(splits.val, "val"),
                      emit(splits.test, "test")};
}

}  // namespace kjepa::synth
