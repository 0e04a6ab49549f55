// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "kjepa/numerics/params.hpp"
#include "kjepa/numerics/tape.hpp"

namespace kjepa {

/// Builds a scalar loss on the given tape from the given parameters.
using LossBuilder = std::function<Tape<double>::Var(Tape<double>&, ParamSet<double>&)>;

struct GradCheckOptions {
  double step = 1e-5;                    ///< central difference step h, in [1e-5, 1e-3]
  std::size_t coords_per_tensor = 16;    ///< random coordinates probed per tensor
  std::uint64_t seed = 0;
  /// Replacement draws per probe when f(p+h) or f(p-h) crosses a ReLU kink.
  std::size_t kink_retries = 8;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  /// Probes discarded because the perturbation changed a ReLU on/off pattern.
  std::size_t kink_skipped = 0;
};

/// Compares tape gradients with (f(p+h) - f(p-h)) / 2h on a random subsample
/// of coordinates. Relative error uses max(|analytic|, |numeric|, 1e-8) as
/// denominator. A probe whose perturbed evaluations switch any ReLU is not a
/// valid difference quotient; it is discarded and, for sampled tensors,
/// redrawn. Throws NumericError if any evaluation is non-finite.
GradCheckResult grad_check(const LossBuilder& f, ParamSet<double>& params,
                           const GradCheckOptions& opts = {});

}  // namespace kjepa
