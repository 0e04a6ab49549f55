// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kjepa/rng.hpp"
#include "kjepa/synthgen/regimes.hpp"

namespace kjepa::synth {

inline constexpr const char* kGeneratorVersion = "kjepa-synthgen-v1";
inline constexpr std::size_t kDefaultMasterLength = 1024;
inline constexpr std::size_t kArmaBurnIn = 256;

struct MasterSequence {
  int regime_id = 0;
  std::uint32_t seq_index = 0;
  std::uint64_t rng_seed = 0;
  std::vector<double> values;
};

/// Redraws the process innovations from `from` onward with an independent
/// stream, keeping everything before it (and the setup draws) unchanged.
/// Used to sample the future of a sequence conditioned on its past.
struct ContinuationDraw {
  std::size_t from = 0;
  std::uint64_t draw = 0;
};

struct GenerateOptions {
  std::size_t length = kDefaultMasterLength;
  /// When false, process innovations and observation noise are forced to zero.
  bool noise = true;
  std::optional<ContinuationDraw> continuation;
};

/// Per-sequence seed: hash64(global_seed, regime_id, seq_index).
std::uint64_t sequence_seed(std::uint64_t global_seed, int regime_id, std::uint32_t seq_index);

/// Deterministic in (global_seed, regime id, seq_index, options).
MasterSequence generate_master(const RegimeSpec& spec, std::uint64_t global_seed,
                               std::uint32_t seq_index, const GenerateOptions& opts = {});

/// x_t = phi x_{t-1} + e_t + theta e_{t-1}, e_t ~ N(0, 1), with the first
/// burn_in samples discarded. Throws ConfigError if |phi| >= 1.
std::vector<double> arma_sample(std::optional<double> phi, std::optional<double> theta,
                                std::size_t length, std::size_t burn_in, CounterRng& rng);

/// (v - mean) / (std + 1e-8) with the population standard deviation.
std::vector<double> standardize(std::span<const double> values);

}  // namespace kjepa::synth
