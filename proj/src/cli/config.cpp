// SPDX-License-Identifier: Apache-2.0
#include "kjepa/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "kjepa/errors.hpp"
#include "kjepa/training/train.hpp"

namespace kjepa::cli {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename U>
U parse_uint(std::string_view v) {
  U out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError("expected a non-negative integer, got '" + std::string(v) + "'");
  return out;
}

double parse_double(std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty() || !std::isfinite(out))
    throw ConfigError("expected a finite number, got '" + std::string(v) + "'");
  return out;
}

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

analysis::Encoder parse_encoder(std::string_view s) {
  if (s == "online") return analysis::Encoder::online;
  if (s == "ema") return analysis::Encoder::ema;
  throw ConfigError("unknown encoder '" + std::string(s) + "' (expected online|ema)");
}

struct Key {
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

using Table = std::vector<std::pair<std::string, std::vector<std::pair<std::string, Key>>>>;

// One entry per key, in echo order.
const Table& table() {
  static const Table t = {
      {"data",
       {
           {"seqs_per_regime",
            {[](auto& c, auto v) { c.data.seqs_per_regime = parse_uint<std::uint32_t>(v); },
             [](const auto& c) { return std::to_string(c.data.seqs_per_regime); }}},
           {"global_seed",
            {[](auto& c, auto v) { c.data.global_seed = parse_uint<std::uint64_t>(v); },
             [](const auto& c) { return std::to_string(c.data.global_seed); }}},
           {"master_len",
            {[](auto& c, auto v) { c.data.master_len = parse_uint<std::uint32_t>(v); },
             [](const auto& c) { return std::to_string(c.data.master_len); }}},
           {"context_len",
            {[](auto& c, auto v) { c.data.context_len = parse_uint<std::uint32_t>(v); },
             [](const auto& c) { return std::to_string(c.data.context_len); }}},
           {"delta",
            {[](auto& c, auto v) { c.data.delta = parse_uint<std::uint32_t>(v); },
             [](const auto& c) { return std::to_string(c.data.delta); }}},
           {"train_frac",
            {[](auto& c, auto v) { c.data.train_frac = parse_double(v); },
             [](const auto& c) { return fmt(c.data.train_frac); }}},
           {"val_frac",
            {[](auto& c, auto v) { c.data.val_frac = parse_double(v); },
             [](const auto& c) { return fmt(c.data.val_frac); }}},
           {"test_frac",
            {[](auto& c, auto v) { c.data.test_frac = parse_double(v); },
             [](const auto& c) { return fmt(c.data.test_frac); }}},
           {"out_dir",
            {[](auto& c, auto v) { c.data.out_dir = fs::path(std::string(v)); },
             [](const auto& c) { return c.data.out_dir.string(); }}},
       }},
      {"model",
       {
           {"latent_dim",
            {[](auto& c, auto v) { c.model.latent_dim = parse_uint<std::size_t>(v); },
             [](const auto& c) { return std::to_string(c.model.latent_dim); }}},
           {"predictor",
            {[](auto& c, auto v) { c.model.predictor = models::parse_predictor(v); },
             [](const auto& c) { return std::string(models::to_string(c.model.predictor)); }}},
           {"predictor_init",
            {[](auto& c, auto v) { c.model.predictor_init = models::parse_predictor_init(v); },
             [](const auto& c) {
               return std::string(models::to_string(c.model.predictor_init));
             }}},
           {"head",
            {[](auto& c, auto v) { c.model.head = models::parse_head(v); },
             [](const auto& c) { return std::string(models::to_string(c.model.head)); }}},
       }},
      {"train",
       {
           {"epochs",
            {[](auto& c, auto v) { c.train.epochs = parse_uint<std::size_t>(v); },
             [](const auto& c) { return std::to_string(c.train.epochs); }}},
           {"batch",
            {[](auto& c, auto v) { c.train.batch = parse_uint<std::size_t>(v); },
             [](const auto& c) { return std::to_string(c.train.batch); }}},
           {"lr",
            {[](auto& c, auto v) { c.train.lr = parse_double(v); },
             [](const auto& c) { return fmt(c.train.lr); }}},
           {"adam_eps",
            {[](auto& c, auto v) { c.train.adam_eps = parse_double(v); },
             [](const auto& c) { return fmt(c.train.adam_eps); }}},
           {"ema_alpha",
            {[](auto& c, auto v) { c.train.ema_alpha = parse_double(v); },
             [](const auto& c) { return fmt(c.train.ema_alpha); }}},
           {"seed",
            {[](auto& c, auto v) { c.train.seed = parse_uint<std::uint64_t>(v); },
             [](const auto& c) { return std::to_string(c.train.seed); }}},
           {"eval_every",
            {[](auto& c, auto v) { c.train.eval_every = parse_uint<std::size_t>(v); },
             [](const auto& c) { return std::to_string(c.train.eval_every); }}},
           {"clip_norm",
            {[](auto& c, auto v) {
               if (v == "none")
                 c.train.clip_norm.reset();
               else
                 c.train.clip_norm = parse_double(v);
             },
             [](const auto& c) {
               return c.train.clip_norm ? fmt(*c.train.clip_norm) : std::string("none");
             }}},
           {"out_dir",
            {[](auto& c, auto v) { c.train.out_dir = fs::path(std::string(v)); },
             [](const auto& c) { return c.train.out_dir.string(); }}},
       }},
      {"analyze",
       {
           {"kmeans_restarts",
            {[](auto& c, auto v) { c.analyze.kmeans_restarts = parse_uint<std::size_t>(v); },
             [](const auto& c) { return std::to_string(c.analyze.kmeans_restarts); }}},
           {"kmeans_seed",
            {[](auto& c, auto v) { c.analyze.kmeans_seed = parse_uint<std::uint64_t>(v); },
             [](const auto& c) { return std::to_string(c.analyze.kmeans_seed); }}},
           {"encoder",
            {[](auto& c, auto v) { c.analyze.encoder = parse_encoder(v); },
             [](const auto& c) {
               return std::string(c.analyze.encoder == analysis::Encoder::ema ? "ema" : "online");
             }}},
           {"decomposition_draws",
            {[](auto& c, auto v) { c.analyze.decomposition_draws = parse_uint<std::size_t>(v); },
             [](const auto& c) { return std::to_string(c.analyze.decomposition_draws); }}},
           {"out_dir",
            {[](auto& c, auto v) { c.analyze.out_dir = fs::path(std::string(v)); },
             [](const auto& c) { return c.analyze.out_dir.string(); }}},
       }},
  };
  return t;
}

const Key* find_key(const std::string& section, const std::string& key) {
  for (const auto& [name, keys] : table()) {
    if (name != section) continue;
    for (const auto& [k, entry] : keys)
      if (k == key) return &entry;
  }
  return nullptr;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  c.model.input_len = c.data.context_len;
  std::set<std::string> seen;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("malformed section header", lineno);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      const bool known = std::any_of(table().begin(), table().end(),
                                     [&](const auto& s) { return s.first == section; });
      if (!known) throw ParseError("unknown section [" + section + "]", lineno);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", lineno);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) throw ParseError("key '" + key + "' outside any section", lineno);
    const Key* entry = find_key(section, key);
    if (!entry) throw ParseError("unknown key '" + key + "' in [" + section + "]", lineno);
    if (!seen.insert(section + "." + key).second)
      throw ParseError("duplicate key '" + key + "' in [" + section + "]", lineno);
    try {
      entry->set(c, value);
    } catch (const ConfigError& e) {
      throw ParseError(section + "." + key + ": " + e.what(), lineno);
    }
  }
  c.model.input_len = c.data.context_len;
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream os;
  for (std::size_t s = 0; s < table().size(); ++s) {
    const auto& [name, keys] = table()[s];
    os << (s ? "\n[" : "[") << name << "]\n";
    for (const auto& [k, entry] : keys) os << k << " = " << entry.get(c) << '\n';
  }
  return os.str();
}

void validate(const ExperimentConfig& c) {
  synth::validate(c.data);
  if (c.model.input_len != c.data.context_len)
    throw ConfigError("model input length must equal data.context_len");
  models::validate(c.model);
  training::TrainConfig t;
  t.epochs = c.train.epochs;
  t.batch_size = c.train.batch;
  t.lr = c.train.lr;
  t.adam_eps = c.train.adam_eps;
  t.ema_alpha = c.train.ema_alpha;
  t.eval_every = c.train.eval_every;
  t.clip_norm = c.train.clip_norm;
  t.model = c.model;
  training::validate(t);
  if (c.analyze.kmeans_restarts == 0) throw ConfigError("analyze.kmeans_restarts must be >= 1");
  if (c.analyze.decomposition_draws == 0)
    throw ConfigError("analyze.decomposition_draws must be >= 1");
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return to_text(a) == to_text(b);
}

}  // namespace kjepa::cli
