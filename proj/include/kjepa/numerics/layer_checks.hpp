// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "kjepa/numerics/gradcheck.hpp"

namespace kjepa {

struct NamedGradCheck {
  std::string name;
  GradCheckResult result;
};

/// Finite-difference checks of every tape operation in isolation, in double
/// precision, with gradients taken w.r.t. inputs and weights alike.
/// ReLU inputs are kept at least 0.1 away from the kink.
std::vector<NamedGradCheck> layer_grad_checks(std::uint64_t seed,
                                              const GradCheckOptions& opts = {});

}  // namespace kjepa
