// SPDX-License-Identifier: Apache-2.0
//
// Reference vs parallel kernels at the encoder's layer shapes, batch 256.
#include <benchmark/benchmark.h>

#include <vector>

#include "kjepa/models/config.hpp"
#include "kjepa/numerics/kernels.hpp"
#include "kjepa/rng.hpp"

namespace {

using namespace kjepa;
using kernels::AffineGeometry;
using kernels::Conv1dGeometry;

std::vector<float> filled(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.normal());
  return v;
}

// Encoder layer `state.range(0)` on a 768-sample context window.
Conv1dGeometry conv_geometry(const benchmark::State& state) {
  std::size_t length = 768;
  for (std::int64_t i = 0;; ++i) {
    const auto& r = models::kEncoderConvs[static_cast<std::size_t>(i)];
    const Conv1dGeometry g{.batch = 256, .in_channels = r.in_channels,
                           .out_channels = r.out_channels, .in_length = length,
                           .kernel_size = r.kernel_size, .stride = r.stride, .padding = r.padding};
    if (i == state.range(0)) return g;
    length = g.out_length();
  }
}

template <bool Parallel>
void BM_ConvForward(benchmark::State& state) {
  const auto g = conv_geometry(state);
  const auto x = filled(g.input_size(), 1), w = filled(g.weight_size(), 2),
             b = filled(g.out_channels, 3);
  std::vector<float> y(g.output_size());
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::conv1d_forward<float>(g, x, w, b, y);
    else
      kernels::reference::conv1d_forward<float>(g, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.output_size() *
                                                                           g.in_channels * g.kernel_size));
}

template <bool Parallel>
void BM_ConvBackward(benchmark::State& state) {
  const auto g = conv_geometry(state);
  const auto x = filled(g.input_size(), 1), w = filled(g.weight_size(), 2),
             gy = filled(g.output_size(), 4);
  std::vector<float> gx(g.input_size()), gw(g.weight_size()), gb(g.out_channels);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::conv1d_backward_input<float>(g, gy, w, gx);
      kernels::parallel::conv1d_backward_weight<float>(g, x, gy, gw, gb);
    } else {
      kernels::reference::conv1d_backward_input<float>(g, gy, w, gx);
      kernels::reference::conv1d_backward_weight<float>(g, x, gy, gw, gb);
    }
    benchmark::DoNotOptimize(gx.data());
    benchmark::DoNotOptimize(gw.data());
  }
}

template <bool Parallel>
void BM_AffineForward(benchmark::State& state) {
  const AffineGeometry g{.batch = 256, .in_features = static_cast<std::size_t>(state.range(0)),
                         .out_features = 64};
  const auto x = filled(g.batch * g.in_features, 1), w = filled(g.out_features * g.in_features, 2),
             b = filled(g.out_features, 3);
  std::vector<float> y(g.batch * g.out_features);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::affine_forward<float>(g, x, w, b, y);
    else
      kernels::reference::affine_forward<float>(g, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
}

BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/reference")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/parallel")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward<false>)->Name("conv_backward/reference")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward<true>)->Name("conv_backward/parallel")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AffineForward<false>)->Name("affine_forward/reference")->Arg(64)->Arg(6144)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AffineForward<true>)->Name("affine_forward/parallel")->Arg(64)->Arg(6144)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
