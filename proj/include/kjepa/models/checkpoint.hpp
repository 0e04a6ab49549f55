// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "kjepa/models/networks.hpp"

namespace kjepa::models {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// KJC1 encoding (little-endian):
///   "KJC1" u32 version u64 config_digest u32 num_tensors
///   per tensor: u32 name_len, name bytes, u32 rank, u32 dims[rank], f32 data[]
/// Online tensors are stored under their own names, EMA tensors under "ema.<name>".
void save_checkpoint(const ModelParams<float>& params, const std::filesystem::path& path);

/// Loads a checkpoint written for `expected`. Throws IoError on malformed files
/// and ConfigError when the stored architecture digest differs.
ModelParams<float> load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

}  // namespace kjepa::models
