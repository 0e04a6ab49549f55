// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "kjepa/models/config.hpp"
#include "kjepa/numerics/gradcheck.hpp"

namespace kjepa::models {

/// Finite-difference check of the whole JEPA loss (encoder, predictor, stop-gradient
/// target) in double precision on `batch` real windows drawn from the regime corpus.
GradCheckResult jepa_grad_check(const ModelConfig& cfg, std::uint64_t seed, std::size_t batch = 2,
                                const GradCheckOptions& opts = {});

/// The same for the autoencoder reconstruction loss.
GradCheckResult ae_grad_check(const ModelConfig& cfg, std::uint64_t seed, std::size_t batch = 2,
                              const GradCheckOptions& opts = {});

}  // namespace kjepa::models
