// SPDX-License-Identifier: Apache-2.0
//
// Dense compute kernels behind the autodiff tape.
//
// Two implementations share one signature set:
//   kernels::reference  straightforward serial loops, kept as the test oracle
//   kernels::parallel   im2col + register-blocked inner products, OpenMP over
//                       batch samples (or output channels for weight grads)
//
// All buffers are row-major. Kernels that "accumulate" add into the output;
// the rest overwrite it. The parallel kernels partition work so that every
// output element is produced by exactly one thread in a fixed summation
// order; repeated calls with the same thread count are bit-identical.
#pragma once

#include <cstddef>
#include <span>

namespace kjepa::kernels {

struct Conv1dGeometry {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t in_length = 1;
  std::size_t kernel_size = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  /// floor((L + 2p - k) / s) + 1. Caller must ensure L + 2p >= k.
  std::size_t out_length() const noexcept {
    return (in_length + 2 * padding - kernel_size) / stride + 1;
  }
  std::size_t input_size() const noexcept { return batch * in_channels * in_length; }
  std::size_t output_size() const noexcept { return batch * out_channels * out_length(); }
  std::size_t weight_size() const noexcept { return out_channels * in_channels * kernel_size; }
};

struct AffineGeometry {
  std::size_t batch = 1;
  std::size_t in_features = 1;
  std::size_t out_features = 1;
};

namespace reference {

// y[b,o,l] = bias[o] + sum_{c,k} w[o,c,k] * x[b,c,l*s+k-p], zero padding. bias may be empty.
// conv1d_backward_input: gx += adjoint of the convolution applied to gy.
// conv1d_backward_weight: gw += dL/dw, gbias += dL/dbias (gbias may be empty).
// affine_forward: y[b,o] = bias[o] + sum_i x[b,i] * w[o,i].
// affine_backward_*: accumulate like their conv counterparts.
template <typename T>
void conv1d_forward(const Conv1dGeometry& g, std::span<const T> x, std::span<const T> w,
                    std::span<const T> bias, std::span<T> y);
template <typename T>
void conv1d_backward_input(const Conv1dGeometry& g, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx);
template <typename T>
void conv1d_backward_weight(const Conv1dGeometry& g, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw, std::span<T> gbias);
template <typename T>
void affine_forward(const AffineGeometry& g, std::span<const T> x, std::span<const T> w,
                    std::span<const T> bias, std::span<T> y);
template <typename T>
void affine_backward_input(const AffineGeometry& g, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx);
template <typename T>
void affine_backward_weight(const AffineGeometry& g, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw, std::span<T> gbias);

}  // namespace reference

namespace parallel {
template <typename T>
void conv1d_forward(const Conv1dGeometry& g, std::span<const T> x, std::span<const T> w,
                    std::span<const T> bias, std::span<T> y);
template <typename T>
void conv1d_backward_input(const Conv1dGeometry& g, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx);
template <typename T>
void conv1d_backward_weight(const Conv1dGeometry& g, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw, std::span<T> gbias);
template <typename T>
void affine_forward(const AffineGeometry& g, std::span<const T> x, std::span<const T> w,
                    std::span<const T> bias, std::span<T> y);
template <typename T>
void affine_backward_input(const AffineGeometry& g, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx);
template <typename T>
void affine_backward_weight(const AffineGeometry& g, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw, std::span<T> gbias);

}  // namespace parallel

/// Threads the parallel kernels will use (1 when built without OpenMP).
int max_threads() noexcept;
void set_num_threads(int n) noexcept;

}  // namespace kjepa::kernels
