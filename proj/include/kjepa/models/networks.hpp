// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "kjepa/models/config.hpp"
#include "kjepa/numerics/params.hpp"
#include "kjepa/numerics/tape.hpp"
#include "kjepa/synthgen/dataset.hpp"

namespace kjepa::models {

/// Online parameters ("encoder.*", plus "predictor.*" for JEPA or "decoder.*"
/// for the autoencoder) and, in JEPA mode, the EMA copy of the encoder under
/// the same "encoder.*" names. EMA tensors never require grad.
template <typename T>
struct ModelParams {
  ModelConfig config;
  ParamSet<T> online;
  ParamSet<T> ema;

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out{config, online.template cast<U>(), ema.template cast<U>()};
    return out;
  }
};

/// Fan-in scaled uniform init U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every
/// weight and bias, each tensor drawn from its own stream keyed by
/// (seed, name), so changing the predictor never perturbs the encoder.
/// The linear predictor is I_k in identity mode. The EMA copy equals the
/// online encoder.
template <typename T>
ModelParams<T> init_params(const ModelConfig& cfg, std::uint64_t seed);

/// x [B, 1, input_len] -> z [B, k] using the "encoder.*" tensors of `set`.
template <typename T>
typename Tape<T>::Var encode(Tape<T>& tape, ParamSet<T>& set, const ModelConfig& cfg,
                             typename Tape<T>::Var x);

/// z [B, k] -> [B, k]. Linear: z M^T. MLP: k -> 2k -> 2k -> k with ReLUs.
template <typename T>
typename Tape<T>::Var predict(Tape<T>& tape, ParamSet<T>& online, const ModelConfig& cfg,
                              typename Tape<T>::Var z);

/// z [B, k] -> reconstruction [B, 1, input_len], mirroring the encoder.
template <typename T>
typename Tape<T>::Var decode(Tape<T>& tape, ParamSet<T>& online, const ModelConfig& cfg,
                             typename Tape<T>::Var z);

/// EMA-encoder embedding of x, evaluated on a private inference tape.
template <typename T>
Tensor<T> ema_encode(ModelParams<T>& params, const Tensor<T>& x);

/// Mean over batch and latent dims of (g(f(context)) - f_ema(target))^2.
/// The target branch enters the tape as a constant (stop-gradient).
template <typename T>
typename Tape<T>::Var jepa_loss(Tape<T>& tape, ModelParams<T>& params, const Tensor<T>& context,
                                const Tensor<T>& target);

/// Mean squared reconstruction error of the context window.
template <typename T>
typename Tape<T>::Var ae_loss(Tape<T>& tape, ModelParams<T>& params, const Tensor<T>& context);

enum class Window { context, target };

/// Gathers windows `indices` of `ds` into a [B, 1, L] tensor.
template <typename T>
Tensor<T> gather_batch(const synth::Dataset& ds, std::span<const std::size_t> indices, Window w);

/// Closed-form parameter counts.
std::size_t encoder_param_count(const ModelConfig& cfg);
std::size_t predictor_param_count(const ModelConfig& cfg);

}  // namespace kjepa::models
