// SPDX-License-Identifier: Apache-2.0
#include "kjepa/models/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "common/binary_io.hpp"
#include "kjepa/hash.hpp"

namespace kjepa::models {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kEmaPrefix = "ema.";
constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint32_t kMaxName = 4096;

void write_tensor(detail::Writer& w, const std::string& name, const Tensor<float>& t) {
  w.le<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
  w.bytes(name.data(), name.size());
  w.le<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) w.le<std::uint32_t>(static_cast<std::uint32_t>(d));
  w.f32s(t.data());
}

}  // namespace

void save_checkpoint(const ModelParams<float>& params, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  detail::Writer w(os);
  w.bytes("KJC1", 4);
  w.le<std::uint32_t>(kCheckpointVersion);
  w.le<std::uint64_t>(params.config.digest());
  w.le<std::uint32_t>(static_cast<std::uint32_t>(params.online.size() + params.ema.size()));
  for (std::size_t i = 0; i < params.online.size(); ++i)
    write_tensor(w, params.online.name(i), params.online.tensor(i));
  for (std::size_t i = 0; i < params.ema.size(); ++i)
    write_tensor(w, std::string(kEmaPrefix) + params.ema.name(i), params.ema.tensor(i));
  if (!os) throw IoError("write failed: " + path.string());
}

ModelParams<float> load_checkpoint(const fs::path& path, const ModelConfig& expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  detail::Reader r(is, path.string());
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "KJC1", 4) != 0) throw IoError(path.string() + ": not a KJC1 file");
  const auto version = r.le<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw IoError(path.string() + ": unsupported version " + std::to_string(version));
  const auto digest = r.le<std::uint64_t>();
  if (digest != expected.digest())
    throw ConfigError(path.string() + ": checkpoint architecture " + hex64(digest) +
                      " does not match config " + hex64(expected.digest()) + " (" +
                      expected.canonical() + ")");

  // The template fixes names, order and shapes; the file must match it exactly.
  ModelParams<float> mp = init_params<float>(expected, 0);
  const std::size_t want = mp.online.size() + mp.ema.size();
  const auto count = r.le<std::uint32_t>();
  if (count != want)
    throw IoError(path.string() + ": expected " + std::to_string(want) + " tensors, found " +
                  std::to_string(count));

  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.le<std::uint32_t>();
    if (name_len == 0 || name_len > kMaxName) throw IoError(path.string() + ": bad tensor name");
    std::string name(name_len, '\0');
    r.bytes(name.data(), name_len);
    const bool is_ema = name.starts_with(kEmaPrefix);
    ParamSet<float>& set = is_ema ? mp.ema : mp.online;
    const std::string key = is_ema ? name.substr(kEmaPrefix.size()) : name;
    if (!set.contains(key)) throw IoError(path.string() + ": unexpected tensor '" + name + "'");
    Tensor<float>& t = set.at(key);

    const auto rank = r.le<std::uint32_t>();
    if (rank > kMaxRank) throw IoError(path.string() + ": bad rank for '" + name + "'");
    Shape shape(rank);
    for (auto& d : shape) d = r.le<std::uint32_t>();
    if (shape != t.shape())
      throw IoError(path.string() + ": tensor '" + name + "' has shape " + shape_str(shape) +
                    ", expected " + shape_str(t.shape()));
    r.f32s(t.data());
  }
  if (is.peek() != std::char_traits<char>::eof())
    throw IoError(path.string() + ": trailing bytes");
  for (std::size_t i = 0; i < mp.online.size(); ++i)
    if (!mp.online.tensor(i).all_finite())
      throw IoError(path.string() + ": non-finite values in '" + mp.online.name(i) + "'");
  return mp;
}

}  // namespace kjepa::models
