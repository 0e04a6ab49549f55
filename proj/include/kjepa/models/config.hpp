// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace kjepa::models {

enum class ModelMode { jepa, ae };
enum class PredictorKind { linear, mlp };
enum class PredictorInit { identity, random };
enum class HeadKind { two_layer, single_layer };

struct ConvRow {
  std::size_t in_channels, out_channels, kernel_size, stride, padding;
};

/// The fixed four-layer convolutional stack of the encoder.
inline constexpr std::array<ConvRow, 4> kEncoderConvs{{
    {1, 16, 7, 2, 3},
    {16, 32, 5, 2, 2},
    {32, 64, 3, 2, 1},
    {64, 128, 3, 2, 1},
}};

struct ModelConfig {
  ModelMode mode = ModelMode::jepa;
  std::size_t latent_dim = 32;
  PredictorKind predictor = PredictorKind::linear;
  PredictorInit predictor_init = PredictorInit::identity;
  HeadKind head = HeadKind::two_layer;
  std::size_t input_len = 768;

  /// Sequence length after each conv row; element 0 is input_len.
  std::array<std::size_t, 5> conv_lengths() const;
  /// Channels * length entering the head (6144 for input_len 768).
  std::size_t flatten_width() const;

  /// Architecture-defining fields only (predictor_init is an initialization
  /// choice and AE configs ignore predictor fields).
  std::string canonical() const;
  std::uint64_t digest() const;
};

/// Throws ConfigError when the conv stack cannot process input_len or k == 0.
void validate(const ModelConfig& cfg);

std::string_view to_string(ModelMode m);
std::string_view to_string(PredictorKind k);
std::string_view to_string(PredictorInit i);
std::string_view to_string(HeadKind h);
ModelMode parse_mode(std::string_view s);
PredictorKind parse_predictor(std::string_view s);
PredictorInit parse_predictor_init(std::string_view s);
HeadKind parse_head(std::string_view s);

}  // namespace kjepa::models
