// SPDX-License-Identifier: Apache-2.0
//
// Optimized kernels. Every operation reduces to one serial, register-blocked
// accumulate-GEMM (C += A * B, row-major) applied per batch sample or per row
// chunk, with OpenMP distributing independent outputs across threads.

#include "kjepa/numerics/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kjepa::kernels {

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_num_threads(int n) noexcept {
#ifdef _OPENMP
  omp_set_num_threads(std::max(1, n));
#else
  (void)n;
#endif
}

namespace parallel {
namespace {

template <typename T>
struct Tile;
template <>
struct Tile<float> {
  static constexpr std::size_t kRows = 4;
  static constexpr std::size_t kCols = 32;
};
template <>
struct Tile<double> {
  static constexpr std::size_t kRows = 4;
  static constexpr std::size_t kCols = 16;
};

constexpr std::size_t kDepthBlock = 256;

template <typename T>
inline void micro_tile(std::size_t depth, const T* a, std::size_t lda, const T* b,
                       std::size_t ldb, T* c, std::size_t ldc) {
  constexpr std::size_t MR = Tile<T>::kRows;
  constexpr std::size_t NR = Tile<T>::kCols;
  T acc[MR][NR];
  for (std::size_t r = 0; r < MR; ++r)
#pragma omp simd
    for (std::size_t t = 0; t < NR; ++t) acc[r][t] = c[r * ldc + t];
  for (std::size_t p = 0; p < depth; ++p) {
    const T* bp = b + p * ldb;
    for (std::size_t r = 0; r < MR; ++r) {
      const T av = a[r * lda + p];
#pragma omp simd
      for (std::size_t t = 0; t < NR; ++t) acc[r][t] += av * bp[t];
    }
  }
  for (std::size_t r = 0; r < MR; ++r)
#pragma omp simd
    for (std::size_t t = 0; t < NR; ++t) c[r * ldc + t] = acc[r][t];
}

template <typename T>
inline void edge_tile(std::size_t rows, std::size_t cols, std::size_t depth, const T* a,
                      std::size_t lda, const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  for (std::size_t r = 0; r < rows; ++r) {
    T* cr = c + r * ldc;
    for (std::size_t p = 0; p < depth; ++p) {
      const T av = a[r * lda + p];
      const T* bp = b + p * ldb;
#pragma omp simd
      for (std::size_t t = 0; t < cols; ++t) cr[t] += av * bp[t];
    }
  }
}

// C[m x n] += A[m x depth] * B[depth x n]. Serial; the summation order for any
// C element depends only on `depth`, never on how callers split rows.
template <typename T>
void gemm_acc(std::size_t m, std::size_t n, std::size_t depth, const T* a, std::size_t lda,
              const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  constexpr std::size_t MR = Tile<T>::kRows;
  constexpr std::size_t NR = Tile<T>::kCols;
  for (std::size_t p0 = 0; p0 < depth; p0 += kDepthBlock) {
    const std::size_t pb = std::min(kDepthBlock, depth - p0);
    for (std::size_t j0 = 0; j0 < n; j0 += NR) {
      const std::size_t nb = std::min(NR, n - j0);
      std::size_t i0 = 0;
      if (nb == NR) {
        for (; i0 + MR <= m; i0 += MR)
          micro_tile(pb, a + i0 * lda + p0, lda, b + p0 * ldb + j0, ldb, c + i0 * ldc + j0, ldc);
      }
      if (i0 < m)
        edge_tile(m - i0, nb, pb, a + i0 * lda + p0, lda, b + p0 * ldb + j0, ldb,
                  c + i0 * ldc + j0, ldc);
    }
  }
}

template <typename T>
void transpose(std::size_t rows, std::size_t cols, const T* in, T* out) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = in[r * cols + c];
}

// cols[(c*K + k) * lout + l] = x[c, l*s + k - p] (0 outside).
template <typename T>
void im2col(const Conv1dGeometry& g, const T* x, T* cols) {
  const std::size_t lout = g.out_length();
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    const T* xc = x + c * g.in_length;
    for (std::size_t k = 0; k < g.kernel_size; ++k) {
      T* row = cols + (c * g.kernel_size + k) * lout;
      for (std::size_t l = 0; l < lout; ++l) {
        const auto pos = static_cast<std::int64_t>(l * g.stride + k) -
                         static_cast<std::int64_t>(g.padding);
        row[l] = (pos < 0 || pos >= static_cast<std::int64_t>(g.in_length))
                     ? T{0}
                     : xc[static_cast<std::size_t>(pos)];
      }
    }
  }
}

// Transposed layout: colsT[l * CK + (c*K + k)].
template <typename T>
void im2col_t(const Conv1dGeometry& g, const T* x, T* cols_t) {
  const std::size_t lout = g.out_length();
  const std::size_t ck = g.in_channels * g.kernel_size;
  for (std::size_t l = 0; l < lout; ++l) {
    T* row = cols_t + l * ck;
    for (std::size_t c = 0; c < g.in_channels; ++c) {
      const T* xc = x + c * g.in_length;
      for (std::size_t k = 0; k < g.kernel_size; ++k) {
        const auto pos = static_cast<std::int64_t>(l * g.stride + k) -
                         static_cast<std::int64_t>(g.padding);
        row[c * g.kernel_size + k] = (pos < 0 || pos >= static_cast<std::int64_t>(g.in_length))
                                         ? T{0}
                                         : xc[static_cast<std::size_t>(pos)];
      }
    }
  }
}

template <typename T>
void col2im_acc(const Conv1dGeometry& g, const T* cols, T* gx) {
  const std::size_t lout = g.out_length();
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    T* gxc = gx + c * g.in_length;
    for (std::size_t k = 0; k < g.kernel_size; ++k) {
      const T* row = cols + (c * g.kernel_size + k) * lout;
      for (std::size_t l = 0; l < lout; ++l) {
        const auto pos = static_cast<std::int64_t>(l * g.stride + k) -
                         static_cast<std::int64_t>(g.padding);
        if (pos >= 0 && pos < static_cast<std::int64_t>(g.in_length))
          gxc[static_cast<std::size_t>(pos)] += row[l];
      }
    }
  }
}

// Splits [0, n) into contiguous chunks, one per thread, so each output row has one owner.
template <typename Fn>
void for_row_chunks(std::size_t n, Fn&& fn) {
#pragma omp parallel
  {
#ifdef _OPENMP
    const auto nt = static_cast<std::size_t>(omp_get_num_threads());
    const auto id = static_cast<std::size_t>(omp_get_thread_num());
#else
    const std::size_t nt = 1, id = 0;
#endif
    const std::size_t chunk = (n + nt - 1) / nt;
    const std::size_t lo = std::min(n, id * chunk);
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo < hi) fn(lo, hi);
  }
}

}  // namespace

template <typename T>
void conv1d_forward(const Conv1dGeometry& g, std::span<const T> x, std::span<const T> w,
                    std::span<const T> bias, std::span<T> y) {
  const std::size_t lout = g.out_length();
  const std::size_t ck = g.in_channels * g.kernel_size;
  const auto batch = static_cast<std::int64_t>(g.batch);
#pragma omp parallel
  {
    std::vector<T> cols(ck * lout);
#pragma omp for schedule(static)
    for (std::int64_t bi = 0; bi < batch; ++bi) {
      const auto b = static_cast<std::size_t>(bi);
      im2col(g, x.data() + b * g.in_channels * g.in_length, cols.data());
      T* yb = y.data() + b * g.out_channels * lout;
      for (std::size_t o = 0; o < g.out_channels; ++o)
        std::fill_n(yb + o * lout, lout, bias.empty() ? T{0} : bias[o]);
      gemm_acc(g.out_channels, lout, ck, w.data(), ck, cols.data(), lout, yb, lout);
    }
  }
}

template <typename T>
void conv1d_backward_input(const Conv1dGeometry& g, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx) {
  const std::size_t lout = g.out_length();
  const std::size_t ck = g.in_channels * g.kernel_size;
  std::vector<T> wt(ck * g.out_channels);
  transpose(g.out_channels, ck, w.data(), wt.data());
  const auto batch = static_cast<std::int64_t>(g.batch);
#pragma omp parallel
  {
    std::vector<T> cols(ck * lout);
#pragma omp for schedule(static)
    for (std::int64_t bi = 0; bi < batch; ++bi) {
      const auto b = static_cast<std::size_t>(bi);
      std::fill(cols.begin(), cols.end(), T{0});
      gemm_acc(ck, lout, g.out_channels, wt.data(), g.out_channels,
               gy.data() + b * g.out_channels * lout, lout, cols.data(), lout);
      col2im_acc(g, cols.data(), gx.data() + b * g.in_channels * g.in_length);
    }
  }
}

template <typename T>
void conv1d_backward_weight(const Conv1dGeometry& g, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw, std::span<T> gbias) {
  const std::size_t lout = g.out_length();
  const std::size_t ck = g.in_channels * g.kernel_size;
  std::vector<T> cols_t(lout * ck);
  for (std::size_t b = 0; b < g.batch; ++b) {
    im2col_t(g, x.data() + b * g.in_channels * g.in_length, cols_t.data());
    const T* gyb = gy.data() + b * g.out_channels * lout;
    for_row_chunks(g.out_channels, [&](std::size_t lo, std::size_t hi) {
      gemm_acc(hi - lo, ck, lout, gyb + lo * lout, lout, cols_t.data(), ck, gw.data() + lo * ck,
               ck);
      if (!gbias.empty()) {
        for (std::size_t o = lo; o < hi; ++o) {
          T s{0};
          for (std::size_t l = 0; l < lout; ++l) s += gyb[o * lout + l];
          gbias[o] += s;
        }
      }
    });
  }
}

template <typename T>
void affine_forward(const AffineGeometry& g, std::span<const T> x, std::span<const T> w,
                    std::span<const T> bias, std::span<T> y) {
  std::vector<T> wt(g.in_features * g.out_features);
  transpose(g.out_features, g.in_features, w.data(), wt.data());
  for_row_chunks(g.batch, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t b = lo; b < hi; ++b)
      for (std::size_t o = 0; o < g.out_features; ++o)
        y[b * g.out_features + o] = bias.empty() ? T{0} : bias[o];
    gemm_acc(hi - lo, g.out_features, g.in_features, x.data() + lo * g.in_features,
             g.in_features, wt.data(), g.out_features, y.data() + lo * g.out_features,
             g.out_features);
  });
}

template <typename T>
void affine_backward_input(const AffineGeometry& g, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx) {
  for_row_chunks(g.batch, [&](std::size_t lo, std::size_t hi) {
    gemm_acc(hi - lo, g.in_features, g.out_features, gy.data() + lo * g.out_features,
             g.out_features, w.data(), g.in_features, gx.data() + lo * g.in_features,
             g.in_features);
  });
}

template <typename T>
void affine_backward_weight(const AffineGeometry& g, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw, std::span<T> gbias) {
  std::vector<T> gyt(g.out_features * g.batch);
  transpose(g.batch, g.out_features, gy.data(), gyt.data());
  for_row_chunks(g.out_features, [&](std::size_t lo, std::size_t hi) {
    gemm_acc(hi - lo, g.in_features, g.batch, gyt.data() + lo * g.batch, g.batch, x.data(),
             g.in_features, gw.data() + lo * g.in_features, g.in_features);
    if (!gbias.empty()) {
      for (std::size_t o = lo; o < hi; ++o) {
        T s{0};
        for (std::size_t b = 0; b < g.batch; ++b) s += gyt[o * g.batch + b];
        gbias[o] += s;
      }
    }
  });
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

}  // namespace parallel
}  // namespace kjepa::kernels
