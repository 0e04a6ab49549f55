// SPDX-License-Identifier: Apache-2.0
//
// Serial reference kernels: direct loops, no im2col, no blocking.

#include "kjepa/numerics/kernels.hpp"

#include <cstdint>

namespace kjepa::kernels::reference {

template <typename T>
void conv1d_forward(const Conv1dGeometry& g, std::span<const T> x, std::span<const T> w,
                    std::span<const T> bias, std::span<T> y) {
  const std::size_t lout = g.out_length();
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      for (std::size_t l = 0; l < lout; ++l) {
        T acc = bias.empty() ? T{0} : bias[o];
        for (std::size_t c = 0; c < g.in_channels; ++c) {
          for (std::size_t k = 0; k < g.kernel_size; ++k) {
            const auto pos = static_cast<std::int64_t>(l * g.stride + k) -
                             static_cast<std::int64_t>(g.padding);
            if (pos < 0 || pos >= static_cast<std::int64_t>(g.in_length)) continue;
            acc += w[(o * g.in_channels + c) * g.kernel_size + k] *
                   x[(b * g.in_channels + c) * g.in_length + static_cast<std::size_t>(pos)];
          }
        }
        y[(b * g.out_channels + o) * lout + l] = acc;
      }
    }
  }
}

template <typename T>
void conv1d_backward_input(const Conv1dGeometry& g, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx) {
  const std::size_t lout = g.out_length();
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      for (std::size_t l = 0; l < lout; ++l) {
        const T go = gy[(b * g.out_channels + o) * lout + l];
        for (std::size_t c = 0; c < g.in_channels; ++c) {
          for (std::size_t k = 0; k < g.kernel_size; ++k) {
            const auto pos = static_cast<std::int64_t>(l * g.stride + k) -
                             static_cast<std::int64_t>(g.padding);
            if (pos < 0 || pos >= static_cast<std::int64_t>(g.in_length)) continue;
            gx[(b * g.in_channels + c) * g.in_length + static_cast<std::size_t>(pos)] +=
                go * w[(o * g.in_channels + c) * g.kernel_size + k];
          }
        }
      }
    }
  }
}

template <typename T>
void conv1d_backward_weight(const Conv1dGeometry& g, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw, std::span<T> gbias) {
  const std::size_t lout = g.out_length();
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      for (std::size_t l = 0; l < lout; ++l) {
        const T go = gy[(b * g.out_channels + o) * lout + l];
        if (!gbias.empty()) gbias[o] += go;
        for (std::size_t c = 0; c < g.in_channels; ++c) {
          for (std::size_t k = 0; k < g.kernel_size; ++k) {
            const auto pos = static_cast<std::int64_t>(l * g.stride + k) -
                             static_cast<std::int64_t>(g.padding);
            if (pos < 0 || pos >= static_cast<std::int64_t>(g.in_length)) continue;
            gw[(o * g.in_channels + c) * g.kernel_size + k] +=
                go * x[(b * g.in_channels + c) * g.in_length + static_cast<std::size_t>(pos)];
          }
        }
      }
    }
  }
}

template <typename T>
void affine_forward(const AffineGeometry& g, std::span<const T> x, std::span<const T> w,
                    std::span<const T> bias, std::span<T> y) {
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t o = 0; o < g.out_features; ++o) {
      T acc = bias.empty() ? T{0} : bias[o];
      for (std::size_t i = 0; i < g.in_features; ++i)
        acc += x[b * g.in_features + i] * w[o * g.in_features + i];
      y[b * g.out_features + o] = acc;
    }
  }
}

template <typename T>
void affine_backward_input(const AffineGeometry& g, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx) {
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t o = 0; o < g.out_features; ++o)
      for (std::size_t i = 0; i < g.in_features; ++i)
        gx[b * g.in_features + i] += gy[b * g.out_features + o] * w[o * g.in_features + i];
}

template <typename T>
void affine_backward_weight(const AffineGeometry& g, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw, std::span<T> gbias) {
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t o = 0; o < g.out_features; ++o) {
      const T go = gy[b * g.out_features + o];
      if (!gbias.empty()) gbias[o] += go;
      for (std::size_t i = 0; i < g.in_features; ++i)
        gw[o * g.in_features + i] += go * x[b * g.in_features + i];
    }
  }
}

#define KJEPA_INSTANTIATE(T)                                                                   \
  template void conv1d_forward<T>(const Conv1dGeometry&, std::span<const T>, std::span<const T>, \
                                  std::span<const T>, std::span<T>);                           \
  template void conv1d_backward_input<T>(const Conv1dGeometry&, std::span<const T>,            \
                                         std::span<const T>, std::span<T>);                    \
  template void conv1d_backward_weight<T>(const Conv1dGeometry&, std::span<const T>,           \
                                          std::span<const T>, std::span<T>, std::span<T>);     \
  template void affine_forward<T>(const AffineGeometry&, std::span<const T>, std::span<const T>, \
                                  std::span<const T>, std::span<T>);                           \
  template void affine_backward_input<T>(const AffineGeometry&, std::span<const T>,            \
                                         std::span<const T>, std::span<T>);                    \
  template void affine_backward_weight<T>(const AffineGeometry&, std::span<const T>,           \
                                          std::span<const T>, std::span<T>, std::span<T>);

KJEPA_INSTANTIATE(float)
KJEPA_INSTANTIATE(double)

#undef KJEPA_INSTANTIATE

}  // namespace kjepa::kernels::reference
