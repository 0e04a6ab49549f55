// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace kjepa::synth {

enum class RegimeKind {
  sine,
  sine_harmonics,
  trend,
  ar,
  ma,
  arma,
  square,
  sawtooth,
  pulses,
  sine_trend,
  sine_high_noise,
};

/// Kind-specific parameters; fields a kind does not use stay at their defaults.
struct RegimeParams {
  double cycles = 0.0;       ///< cycle count c over L_master samples
  double amplitude = 1.0;
  double phi = 0.0;          ///< AR(1) coefficient
  double theta = 0.0;        ///< MA(1) coefficient
  double base_slope = 0.0;   ///< trend slope before the per-sequence N(0,1) draw
  int pulse_count = 0;
  double pulse_width_fraction = 0.0;  ///< pulse width as a fraction of L_master
  double pulse_amplitude = 0.0;
  double process_noise_std = 0.0;     ///< additive N(0, s^2) per step (Sine_HighNoise)
  double observation_noise_std = 0.0; ///< 0 for every regime of the corpus
};

struct RegimeSpec {
  int id = 0;
  std::string_view name;
  RegimeKind kind = RegimeKind::sine;
  RegimeParams params;

  /// True for kinds without process noise: the whole master sequence is fixed
  /// by the per-sequence setup draws (phase, slope, pulse onsets).
  bool deterministic() const noexcept;
};

inline constexpr std::size_t kNumRegimes = 18;
inline constexpr double kCyclesLow = 7.0;
inline constexpr double kCyclesMed = 10.0;
inline constexpr double kCyclesHigh = 15.0;

/// The 18 regimes in label order 0..17.
const std::array<RegimeSpec, kNumRegimes>& regimes();
const RegimeSpec& regime(int id);

/// Throws ConfigError if the spec is malformed (bad id, non-stationary AR part, ...).
void validate(const RegimeSpec& spec);

}  // namespace kjepa::synth
