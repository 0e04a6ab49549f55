// SPDX-License-Identifier: Apache-2.0
#include "kjepa/models/networks.hpp"

#include <cmath>
#include <string>

#include "kjepa/hash.hpp"
#include "kjepa/rng.hpp"

namespace kjepa::models {

namespace {

struct DeconvRow {
  std::size_t in_channels, out_channels, kernel_size, stride, padding, output_padding;
};

// Transposed convolutions undoing the encoder rows in reverse order.
std::array<DeconvRow, 4> decoder_rows(const ModelConfig& cfg) {
  const auto len = cfg.conv_lengths();
  std::array<DeconvRow, 4> rows{};
  for (std::size_t i = 0; i < 4; ++i) {
    const ConvRow& r = kEncoderConvs[3 - i];
    const std::size_t lin = len[4 - i];
    const std::size_t lout = len[3 - i];
    const std::size_t base = (lin - 1) * r.stride + r.kernel_size - 2 * r.padding;
    if (lout < base || lout - base >= r.stride)
      throw ConfigError("decoder cannot mirror encoder for input_len " + std::to_string(cfg.input_len));
    rows[i] = {r.out_channels, r.in_channels, r.kernel_size, r.stride, r.padding, lout - base};
  }
  return rows;
}

template <typename T>
Tensor<T> uniform_tensor(Shape shape, double bound, std::uint64_t seed, std::string_view name) {
  Tensor<T> t(std::move(shape));
  CounterRng rng(hash64(seed, fnv1a64(name)));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(rng.uniform(-bound, bound));
  t.set_requires_grad(true);
  return t;
}

template <typename T>
void add_affine(ParamSet<T>& set, const std::string& prefix, std::size_t in, std::size_t out,
                std::uint64_t seed, bool bias = true) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  set.add(prefix + ".weight", uniform_tensor<T>({out, in}, bound, seed, prefix + ".weight"));
  if (bias) set.add(prefix + ".bias", uniform_tensor<T>({out}, bound, seed, prefix + ".bias"));
}

template <typename T>
void add_encoder(ParamSet<T>& set, const ModelConfig& cfg, std::uint64_t seed) {
  for (std::size_t i = 0; i < kEncoderConvs.size(); ++i) {
    const ConvRow& r = kEncoderConvs[i];
    const std::string p = "encoder.conv" + std::to_string(i + 1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(r.in_channels * r.kernel_size));
    set.add(p + ".weight", uniform_tensor<T>({r.out_channels, r.in_channels, r.kernel_size},
                                             bound, seed, p + ".weight"));
    set.add(p + ".bias", uniform_tensor<T>({r.out_channels}, bound, seed, p + ".bias"));
  }
  const std::size_t k = cfg.latent_dim;
  if (cfg.head == HeadKind::two_layer) {
    add_affine(set, "encoder.head1", cfg.flatten_width(), 2 * k, seed);
    add_affine(set, "encoder.head2", 2 * k, k, seed);
  } else {
    add_affine(set, "encoder.head1", cfg.flatten_width(), k, seed);
  }
}

template <typename T>
typename Tape<T>::Var bind_affine(Tape<T>& tape, ParamSet<T>& set, const std::string& prefix,
                                  typename Tape<T>::Var x) {
  auto w = tape.parameter(set.at(prefix + ".weight"));
  std::optional<typename Tape<T>::Var> b;
  if (set.contains(prefix + ".bias")) b = tape.parameter(set.at(prefix + ".bias"));
  return tape.affine(x, w, b);
}

}  // namespace

std::size_t encoder_param_count(const ModelConfig& cfg) {
  std::size_t n = 0;
  for (const ConvRow& r : kEncoderConvs)
    n += r.out_channels * r.in_channels * r.kernel_size + r.out_channels;
  const std::size_t k = cfg.latent_dim;
  if (cfg.head == HeadKind::two_layer)
    n += cfg.flatten_width() * 2 * k + 2 * k + 2 * k * k + k;
  else
    n += cfg.flatten_width() * k + k;
  return n;
}

std::size_t predictor_param_count(const ModelConfig& cfg) {
  const std::size_t k = cfg.latent_dim;
  if (cfg.mode != ModelMode::jepa) return 0;
  if (cfg.predictor == PredictorKind::linear) return k * k;
  return (k * 2 * k + 2 * k) + (2 * k * 2 * k + 2 * k) + (2 * k * k + k);
}

template <typename T>
ModelParams<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  ModelParams<T> mp;
  mp.config = cfg;
  add_encoder(mp.online, cfg, seed);
  const std::size_t k = cfg.latent_dim;

  if (cfg.mode == ModelMode::jepa) {
    if (cfg.predictor == PredictorKind::linear) {
      Tensor<T> m = uniform_tensor<T>({k, k}, 1.0 / std::sqrt(static_cast<double>(k)), seed,
                                      "predictor.M");
      if (cfg.predictor_init == PredictorInit::identity)
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j) m[i * k + j] = i == j ? T{1} : T{0};
      mp.online.add("predictor.M", std::move(m));
    } else {
      add_affine(mp.online, "predictor.fc1", k, 2 * k, seed);
      add_affine(mp.online, "predictor.fc2", 2 * k, 2 * k, seed);
      add_affine(mp.online, "predictor.fc3", 2 * k, k, seed);
    }
    for (std::size_t i = 0; i < mp.online.size(); ++i) {
      if (!mp.online.name(i).starts_with("encoder.")) continue;
      Tensor<T> copy = mp.online.tensor(i);
      copy.set_requires_grad(false);
      copy.drop_grad();
      mp.ema.add(mp.online.name(i), std::move(copy));
    }
  } else {
    add_affine(mp.online, "decoder.fc1", k, 2 * k, seed);
    add_affine(mp.online, "decoder.fc2", 2 * k, cfg.flatten_width(), seed);
    const auto rows = decoder_rows(cfg);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const DeconvRow& r = rows[i];
      const std::string p = "decoder.deconv" + std::to_string(i + 1);
      const double bound = 1.0 / std::sqrt(static_cast<double>(r.out_channels * r.kernel_size));
      mp.online.add(p + ".weight",
                    uniform_tensor<T>({r.in_channels, r.out_channels, r.kernel_size}, bound, seed,
                                      p + ".weight"));
      mp.online.add(p + ".bias", uniform_tensor<T>({r.out_channels}, bound, seed, p + ".bias"));
    }
  }
  return mp;
}

template <typename T>
typename Tape<T>::Var encode(Tape<T>& tape, ParamSet<T>& set, const ModelConfig& cfg,
                             typename Tape<T>::Var x) {
  const Tensor<T>& xv = tape.value(x);
  if (xv.rank() != 3 || xv.dim(1) != 1 || xv.dim(2) != cfg.input_len)
    throw DimensionError("encode: expected [B, 1, " + std::to_string(cfg.input_len) + "], got " +
                         shape_str(xv.shape()));
  auto h = x;
  for (std::size_t i = 0; i < kEncoderConvs.size(); ++i) {
    const ConvRow& r = kEncoderConvs[i];
    const std::string p = "encoder.conv" + std::to_string(i + 1);
    h = tape.relu(tape.conv1d(h, tape.parameter(set.at(p + ".weight")),
                              tape.parameter(set.at(p + ".bias")), r.stride, r.padding));
  }
  h = tape.flatten(h);
  h = bind_affine(tape, set, "encoder.head1", h);
  if (cfg.head == HeadKind::two_layer) h = bind_affine(tape, set, "encoder.head2", tape.relu(h));
  return h;
}

template <typename T>
typename Tape<T>::Var predict(Tape<T>& tape, ParamSet<T>& online, const ModelConfig& cfg,
                              typename Tape<T>::Var z) {
  const Tensor<T>& zv = tape.value(z);
  if (zv.rank() != 2 || zv.dim(1) != cfg.latent_dim)
    throw DimensionError("predict: expected [B, " + std::to_string(cfg.latent_dim) + "], got " +
                         shape_str(zv.shape()));
  if (cfg.predictor == PredictorKind::linear)
    return tape.affine(z, tape.parameter(online.at("predictor.M")), std::nullopt);
  auto h = tape.relu(bind_affine(tape, online, "predictor.fc1", z));
  h = tape.relu(bind_affine(tape, online, "predictor.fc2", h));
  return bind_affine(tape, online, "predictor.fc3", h);
}

template <typename T>
typename Tape<T>::Var decode(Tape<T>& tape, ParamSet<T>& online, const ModelConfig& cfg,
                             typename Tape<T>::Var z) {
  const auto len = cfg.conv_lengths();
  auto h = tape.relu(bind_affine(tape, online, "decoder.fc1", z));
  h = bind_affine(tape, online, "decoder.fc2", h);
  const std::size_t batch = tape.value(h).dim(0);
  h = tape.reshape(h, Shape{batch, kEncoderConvs.back().out_channels, len.back()});
  const auto rows = decoder_rows(cfg);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const DeconvRow& r = rows[i];
    const std::string p = "decoder.deconv" + std::to_string(i + 1);
    h = tape.relu(h);
    h = tape.conv_transpose1d(h, tape.parameter(online.at(p + ".weight")),
                              tape.parameter(online.at(p + ".bias")), r.stride, r.padding,
                              r.output_padding);
  }
  return h;
}

template <typename T>
Tensor<T> ema_encode(ModelParams<T>& params, const Tensor<T>& x) {
  if (params.ema.empty()) throw ContractError("ema_encode: model has no EMA encoder");
  Tape<T> tape(Tape<T>::Mode::inference);
  auto z = encode(tape, params.ema, params.config, tape.constant(x));
  return tape.value(z);
}

template <typename T>
typename Tape<T>::Var jepa_loss(Tape<T>& tape, ModelParams<T>& params, const Tensor<T>& context,
                                const Tensor<T>& target) {
  if (params.config.mode != ModelMode::jepa)
    throw ContractError("jepa_loss: model is not in JEPA mode");
  auto target_z = tape.constant(ema_encode(params, target));
  auto z = encode(tape, params.online, params.config, tape.constant(context));
  auto pred = predict(tape, params.online, params.config, z);
  return tape.mse(pred, target_z);
}

template <typename T>
typename Tape<T>::Var ae_loss(Tape<T>& tape, ModelParams<T>& params, const Tensor<T>& context) {
  if (params.config.mode != ModelMode::ae)
    throw ContractError("ae_loss: model is not in autoencoder mode");
  auto x = tape.constant(context);
  auto z = encode(tape, params.online, params.config, x);
  return tape.mse(decode(tape, params.online, params.config, z), x);
}

template <typename T>
Tensor<T> gather_batch(const synth::Dataset& ds, std::span<const std::size_t> indices, Window w) {
  const std::size_t len = w == Window::context ? ds.context_len() : ds.target_len();
  Tensor<T> out({indices.size(), 1, len});
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto src = w == Window::context ? ds.context(indices[b]) : ds.target(indices[b]);
    for (std::size_t i = 0; i < len; ++i) out[b * len + i] = static_cast<T>(src[i]);
  }
  return out;
}

#define KJEPA_INSTANTIATE(T)                                                                      \
  template ModelParams<T> init_params<T>(const ModelConfig&, std::uint64_t);                      \
  template Tape<T>::Var encode<T>(Tape<T>&, ParamSet<T>&, const ModelConfig&, Tape<T>::Var);     \
  template Tape<T>::Var predict<T>(Tape<T>&, ParamSet<T>&, const ModelConfig&, Tape<T>::Var);    \
  template Tape<T>::Var decode<T>(Tape<T>&, ParamSet<T>&, const ModelConfig&, Tape<T>::Var);     \
  template Tensor<T> ema_encode<T>(ModelParams<T>&, const Tensor<T>&);                            \
  template Tape<T>::Var jepa_loss<T>(Tape<T>&, ModelParams<T>&, const Tensor<T>&,                 \
                                     const Tensor<T>&);                                           \
  template Tape<T>::Var ae_loss<T>(Tape<T>&, ModelParams<T>&, const Tensor<T>&);                  \
  template Tensor<T> gather_batch<T>(const synth::Dataset&, std::span<const std::size_t>, Window);

KJEPA_INSTANTIATE(float)
KJEPA_INSTANTIATE(double)

#undef KJEPA_INSTANTIATE

}  // namespace kjepa::models
