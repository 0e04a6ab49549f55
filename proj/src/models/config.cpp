// SPDX-License-Identifier: Apache-2.0
#include "kjepa/models/config.hpp"

#include "kjepa/errors.hpp"
#include "kjepa/hash.hpp"

namespace kjepa::models {

std::array<std::size_t, 5> ModelConfig::conv_lengths() const {
  std::array<std::size_t, 5> len{};
  len[0] = input_len;
  for (std::size_t i = 0; i < kEncoderConvs.size(); ++i) {
    const ConvRow& r = kEncoderConvs[i];
    if (len[i] + 2 * r.padding < r.kernel_size) return {};
    len[i + 1] = (len[i] + 2 * r.padding - r.kernel_size) / r.stride + 1;
  }
  return len;
}

std::size_t ModelConfig::flatten_width() const {
  return kEncoderConvs.back().out_channels * conv_lengths().back();
}

std::string ModelConfig::canonical() const {
  std::string s = "mode=" + std::string(to_string(mode)) + ";k=" + std::to_string(latent_dim) +
                  ";head=" + std::string(to_string(head)) + ";input_len=" + std::to_string(input_len);
  if (mode == ModelMode::jepa) s += ";predictor=" + std::string(to_string(predictor));
  return s;
}

std::uint64_t ModelConfig::digest() const { return fnv1a64(canonical()); }

void validate(const ModelConfig& cfg) {
  if (cfg.latent_dim == 0) throw ConfigError("latent_dim must be > 0");
  if (cfg.input_len == 0 || cfg.conv_lengths().back() == 0)
    throw ConfigError("input length " + std::to_string(cfg.input_len) + " too short for the encoder");
}

std::string_view to_string(ModelMode m) { return m == ModelMode::jepa ? "jepa" : "ae"; }
std::string_view to_string(PredictorKind k) { return k == PredictorKind::linear ? "linear" : "mlp"; }
std::string_view to_string(PredictorInit i) {
  return i == PredictorInit::identity ? "identity" : "random";
}
std::string_view to_string(HeadKind h) {
  return h == HeadKind::two_layer ? "two_layer" : "single_layer";
}

ModelMode parse_mode(std::string_view s) {
  if (s == "jepa") return ModelMode::jepa;
  if (s == "ae") return ModelMode::ae;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected jepa|ae)");
}

PredictorKind parse_predictor(std::string_view s) {
  if (s == "linear") return PredictorKind::linear;
  if (s == "mlp") return PredictorKind::mlp;
  throw ConfigError("unknown predictor '" + std::string(s) + "' (expected linear|mlp)");
}

PredictorInit parse_predictor_init(std::string_view s) {
  if (s == "identity") return PredictorInit::identity;
  if (s == "random") return PredictorInit::random;
  throw ConfigError("unknown predictor_init '" + std::string(s) + "' (expected identity|random)");
}

HeadKind parse_head(std::string_view s) {
  if (s == "two_layer") return HeadKind::two_layer;
  if (s == "single_layer") return HeadKind::single_layer;
  throw ConfigError("unknown head '" + std::string(s) + "' (expected two_layer|single_layer)");
}

}  // namespace kjepa::models
