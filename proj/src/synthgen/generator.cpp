// SPDX-License-Identifier: Apache-2.0
#include "kjepa/synthgen/generator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kjepa/errors.hpp"

namespace kjepa::synth {

namespace {

constexpr double kPi = std::numbers::pi;

// Stream tags under the per-sequence seed.
constexpr std::uint64_t kSetupStream = 1;
constexpr std::uint64_t kInnovationStream = 2;
constexpr std::uint64_t kObservationStream = 3;
constexpr std::uint64_t kContinuationStream = 4;

/// Standard normal innovations indexed by time (burn-in steps come first).
/// Switches to an independent stream at the continuation point, if any.
class Innovations {
 public:
  Innovations(std::uint64_t seq_seed, const GenerateOptions& opts, std::size_t burn_in)
      : base_(hash64(seq_seed, kInnovationStream)),
        alt_(hash64(seq_seed, kContinuationStream, opts.continuation ? opts.continuation->draw : 0)),
        enabled_(opts.noise),
        switch_at_(opts.continuation ? opts.continuation->from + burn_in : SIZE_MAX) {}

  /// Innovation for absolute step `i` (0 = first burn-in step). Must be called in order.
  double at(std::size_t i) {
    if (!enabled_) return 0.0;
    return i >= switch_at_ ? alt_.normal() : base_.normal();
  }

 private:
  CounterRng base_;
  CounterRng alt_;
  bool enabled_;
  std::size_t switch_at_;
};

double sign_nonneg(double x) { return x >= 0.0 ? 1.0 : -1.0; }

}  // namespace

std::uint64_t sequence_seed(std::uint64_t global_seed, int regime_id, std::uint32_t seq_index) {
  return hash64(global_seed, static_cast<std::uint64_t>(regime_id), seq_index);
}

std::vector<double> arma_sample(std::optional<double> phi, std::optional<double> theta,
                                std::size_t length, std::size_t burn_in, CounterRng& rng) {
  const double ph = phi.value_or(0.0);
  const double th = theta.value_or(0.0);
  if (!(std::fabs(ph) < 1.0)) throw ConfigError("arma_sample: |phi| must be < 1");
  std::vector<double> out;
  out.reserve(length);
  double x = 0.0;
  double e_prev = 0.0;
  for (std::size_t i = 0; i < burn_in + length; ++i) {
    const double e = rng.normal();
    x = ph * x + e + th * e_prev;
    e_prev = e;
    if (i >= burn_in) out.push_back(x);
  }
  return out;
}

std::vector<double> standardize(std::span<const double> values) {
  if (values.empty()) return {};
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / (sd + 1e-8);
  return out;
}

MasterSequence generate_master(const RegimeSpec& spec, std::uint64_t global_seed,
                               std::uint32_t seq_index, const GenerateOptions& opts) {
  validate(spec);
  const std::size_t len = opts.length;
  if (len < 2) throw ConfigError("generate_master: length must be >= 2");

  MasterSequence seq;
  seq.regime_id = spec.id;
  seq.seq_index = seq_index;
  seq.rng_seed = sequence_seed(global_seed, spec.id, seq_index);
  seq.values.assign(len, 0.0);

  const auto& p = spec.params;
  const double L = static_cast<double>(len);
  const double freq = 2.0 * kPi * p.cycles / L;
  CounterRng setup(hash64(seq.rng_seed, kSetupStream));
  auto& v = seq.values;

  auto add_trend = [&](double base_slope) {
    const double slope = base_slope + setup.normal();
    const double intercept = setup.normal(0.0, kPi);
    for (std::size_t t = 0; t < len; ++t)
      v[t] += slope * static_cast<double>(t) / (L - 1.0) + intercept;
  };

  switch (spec.kind) {
    case RegimeKind::sine: {
      const double phase = setup.normal(0.0, kPi);
      for (std::size_t t = 0; t < len; ++t) v[t] = p.amplitude * std::sin(freq * t + phase);
      break;
    }
    case RegimeKind::sine_harmonics: {
      const double phase = setup.normal(0.0, kPi);
      const double phase2 = setup.normal(0.0, kPi);
      for (std::size_t t = 0; t < len; ++t)
        v[t] = 0.7 * std::sin(freq * t + phase) + 0.3 * std::sin(3.0 * freq * t + phase2);
      break;
    }
    case RegimeKind::trend:
      add_trend(p.base_slope);
      break;
    case RegimeKind::ar:
    case RegimeKind::ma:
    case RegimeKind::arma: {
      Innovations eps(seq.rng_seed, opts, kArmaBurnIn);
      double x = 0.0;
      double e_prev = 0.0;
      for (std::size_t i = 0; i < kArmaBurnIn + len; ++i) {
        const double e = eps.at(i);
        x = p.phi * x + e + p.theta * e_prev;
        e_prev = e;
        if (i >= kArmaBurnIn) v[i - kArmaBurnIn] = x;
      }
      break;
    }
    case RegimeKind::square: {
      const double phase = setup.normal(0.0, kPi);
      for (std::size_t t = 0; t < len; ++t)
        v[t] = p.amplitude * sign_nonneg(std::sin(freq * t + phase));
      break;
    }
    case RegimeKind::sawtooth: {
      const double phase = setup.normal(0.0, kPi);
      for (std::size_t t = 0; t < len; ++t) {
        const double u = p.cycles * static_cast<double>(t) / L + phase / (2.0 * kPi);
        v[t] = p.amplitude * (2.0 * (u - std::floor(u)) - 1.0);
      }
      break;
    }
    case RegimeKind::pulses: {
      const auto width = static_cast<std::size_t>(std::lround(L * p.pulse_width_fraction));
      const std::size_t span = len > width ? len - width : 0;
      for (int k = 0; k < p.pulse_count; ++k) {
        const std::size_t onset = setup.below(span + 1);
        for (std::size_t t = onset; t < onset + width && t < len; ++t) v[t] += p.pulse_amplitude;
      }
      break;
    }
    case RegimeKind::sine_trend: {
      const double phase = setup.normal(0.0, kPi);
      for (std::size_t t = 0; t < len; ++t) v[t] = p.amplitude * std::sin(freq * t + phase);
      add_trend(p.base_slope);
      break;
    }
    case RegimeKind::sine_high_noise: {
      const double phase = setup.normal(0.0, kPi);
      Innovations eta(seq.rng_seed, opts, 0);
      for (std::size_t t = 0; t < len; ++t)
        v[t] = p.amplitude * std::sin(freq * t + phase) + p.process_noise_std * eta.at(t);
      break;
    }
  }

  if (opts.noise && p.observation_noise_std > 0.0) {
    CounterRng obs(hash64(seq.rng_seed, kObservationStream));
    for (double& x : v) x += p.observation_noise_std * obs.normal();
  }
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError("generate_master: non-finite sample");
  return seq;
}

}  // namespace kjepa::synth
