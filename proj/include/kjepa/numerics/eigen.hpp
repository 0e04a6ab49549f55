// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <span>
#include <vector>

#include "kjepa/errors.hpp"

namespace kjepa {

/// Thrown when the QR iteration exceeds its sweep budget. Eigenvalues that
/// had already deflated are kept; `valid[i]` tells which entries are usable.
class EigenConvergenceError : public NumericError {
 public:
  EigenConvergenceError(std::vector<std::complex<double>> partial, std::vector<bool> valid)
      : NumericError("eigenvalues: QR iteration did not converge"),
        partial_(std::move(partial)),
        valid_(std::move(valid)) {}
  const std::vector<std::complex<double>>& partial() const noexcept { return partial_; }
  const std::vector<bool>& valid() const noexcept { return valid_; }

 private:
  std::vector<std::complex<double>> partial_;
  std::vector<bool> valid_;
};

/// Eigenvalues of a real n x n row-major matrix (n <= 64), sorted by descending
/// magnitude. Householder reduction to upper Hessenberg form, then Francis
/// double-shift QR on the real Schur form; 2x2 blocks yield conjugate pairs.
/// At most 100 n QR sweeps in total, no balancing.
std::vector<std::complex<double>> eigenvalues(std::span<const double> m, std::size_t n);

/// Reduces `a` (row-major n x n) in place to upper Hessenberg form by
/// similarity transforms. Exposed for testing.
void hessenberg_reduce(std::span<double> a, std::size_t n);

}  // namespace kjepa
