// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kjepa/numerics/params.hpp"

namespace kjepa {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers keyed by parameter name.
template <typename T>
struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::map<std::string, std::pair<std::vector<T>, std::vector<T>>> moments;

  AdamState() = default;
  explicit AdamState(AdamConfig c) : config(c) {}
};

/// Bias-corrected Adam update on every parameter that requires grad, then zeroes
/// those grads. Parameters that do not require grad are skipped.
/// Throws ContractError if a trainable parameter has no gradient buffer.
template <typename T>
void adam_step(AdamState<T>& state, ParamSet<T>& params);

/// target <- alpha * target + (1 - alpha) * online, elementwise.
///
/// The target's names must equal exactly the online names that start with
/// `prefix` (pass "" to require identical sets), with matching shapes.
template <typename T>
void ema_update(ParamSet<T>& target, const ParamSet<T>& online, double alpha,
                std::string_view prefix = "");

/// Global L2 norm over all present gradients.
template <typename T>
double grad_norm(const ParamSet<T>& params);

/// Rescales gradients so their global norm is at most max_norm.
template <typename T>
void clip_grad_norm(ParamSet<T>& params, double max_norm);

}  // namespace kjepa
