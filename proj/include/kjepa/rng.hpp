// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace kjepa {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Order-sensitive combination of words into one 64-bit seed.
constexpr std::uint64_t hash64(std::uint64_t a) noexcept { return mix64(a + 0x9e3779b97f4a7c15ULL); }

template <typename... Rest>
constexpr std::uint64_t hash64(std::uint64_t a, std::uint64_t b, Rest... rest) noexcept {
  return hash64(mix64(a + 0x9e3779b97f4a7c15ULL) ^ b, rest...);
}

/// "kjepa-splitmix64-v1": counter-based stream. Draw i is mix64(seed + (i+1)*golden),
/// so the output is a pure function of (seed, counter). Normals use the basic
/// Box-Muller transform (two uniforms in, two normals out) to stay
/// implementation-independent, unlike std::normal_distribution.
class CounterRng {
 public:
  static constexpr const char* kName = "kjepa-splitmix64-v1";

  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(seed_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Uses the multiply-high reduction; bias is < n / 2^64.
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Fisher-Yates over any random-access range, driven by CounterRng.
template <typename Range>
void shuffle(Range& r, CounterRng& rng) {
  const auto n = static_cast<std::uint64_t>(r.size());
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = rng.below(i);
    using std::swap;
    swap(r[i - 1], r[j]);
  }
}

}  // namespace kjepa
