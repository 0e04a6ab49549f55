// SPDX-License-Identifier: Apache-2.0
#include "kjepa/synthgen/regimes.hpp"

#include <cmath>
#include <string>

#include "kjepa/errors.hpp"

namespace kjepa::synth {

bool RegimeSpec::deterministic() const noexcept {
  switch (kind) {
    case RegimeKind::ar:
    case RegimeKind::ma:
    case RegimeKind::arma:
    case RegimeKind::sine_high_noise:
      return false;
    default:
      return params.observation_noise_std == 0.0;
  }
}

namespace {

constexpr RegimeParams sine(double cycles, double amplitude = 1.0) {
  RegimeParams p;
  p.cycles = cycles;
  p.amplitude = amplitude;
  return p;
}

constexpr RegimeParams trend(double slope) {
  RegimeParams p;
  p.base_slope = slope;
  return p;
}

constexpr RegimeParams arma(double phi, double theta) {
  RegimeParams p;
  p.phi = phi;
  p.theta = theta;
  return p;
}

constexpr RegimeParams pulses() {
  RegimeParams p;
  p.pulse_count = 5;
  p.pulse_width_fraction = 1.0 / 50.0;
  p.pulse_amplitude = 2.0;
  return p;
}

constexpr RegimeParams sine_trend() {
  RegimeParams p = sine(kCyclesMed, 0.8);
  p.base_slope = 1.0;
  return p;
}

constexpr RegimeParams high_noise() {
  RegimeParams p = sine(kCyclesMed);
  p.process_noise_std = 3.0;
  return p;
}

constexpr std::array<RegimeSpec, kNumRegimes> kRegimes{{
    {0, "Sine_LowFreq", RegimeKind::sine, sine(kCyclesLow)},
    {1, "Sine_MedFreq", RegimeKind::sine, sine(kCyclesMed)},
    {2, "Sine_HighFreq", RegimeKind::sine, sine(kCyclesHigh)},
    {3, "Sine_LowAmp", RegimeKind::sine, sine(kCyclesMed, 0.3)},
    {4, "Sine_Harmonics", RegimeKind::sine_harmonics, sine(kCyclesMed)},
    {5, "Trend_Up", RegimeKind::trend, trend(1.5)},
    {6, "Trend_Down", RegimeKind::trend, trend(-1.5)},
    {7, "AR_PosStrong", RegimeKind::ar, arma(0.9, 0.0)},
    {8, "AR_PosWeak", RegimeKind::ar, arma(0.3, 0.0)},
    {9, "AR_Neg", RegimeKind::ar, arma(-0.7, 0.0)},
    {10, "MA_Pos", RegimeKind::ma, arma(0.0, 0.7)},
    {11, "ARMA_Mixed", RegimeKind::arma, arma(0.5, -0.4)},
    {12, "Square_LowFreq", RegimeKind::square, sine(kCyclesLow)},
    {13, "Square_HighFreq", RegimeKind::square, sine(kCyclesHigh)},
    {14, "Sawtooth_MedFreq", RegimeKind::sawtooth, sine(kCyclesMed)},
    {15, "Pulses_Sparse", RegimeKind::pulses, pulses()},
    {16, "Sine_Trend", RegimeKind::sine_trend, sine_trend()},
    {17, "Sine_HighNoise", RegimeKind::sine_high_noise, high_noise()},
}};

}  // namespace

const std::array<RegimeSpec, kNumRegimes>& regimes() { return kRegimes; }

const RegimeSpec& regime(int id) {
  if (id < 0 || id >= static_cast<int>(kNumRegimes))
    throw ConfigError("regime id " + std::to_string(id) + " out of range 0..17");
  return kRegimes[static_cast<std::size_t>(id)];
}

void validate(const RegimeSpec& spec) {
  if (spec.id < 0 || spec.id >= static_cast<int>(kNumRegimes))
    throw ConfigError("regime id " + std::to_string(spec.id) + " out of range");
  const auto& p = spec.params;
  if (!(std::fabs(p.phi) < 1.0))
    throw ConfigError(std::string(spec.name) + ": AR coefficient outside the stationary region");
  if (p.process_noise_std < 0 || p.observation_noise_std < 0)
    throw ConfigError(std::string(spec.name) + ": negative noise level");
  if (spec.kind == RegimeKind::pulses && (p.pulse_count < 0 || p.pulse_width_fraction <= 0))
    throw ConfigError(std::string(spec.name) + ": bad pulse parameters");
}

}  // namespace kjepa::synth
