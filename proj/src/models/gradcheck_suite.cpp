// SPDX-License-Identifier: Apache-2.0
#include "kjepa/models/gradcheck_suite.hpp"

#include "kjepa/models/networks.hpp"
#include "kjepa/synthgen/generator.hpp"
#include "kjepa/synthgen/regimes.hpp"

namespace kjepa::models {

namespace {

struct Windows {
  Tensor<double> context, target;
};

Windows sample_windows(const ModelConfig& cfg, std::uint64_t seed, std::size_t batch) {
  const std::size_t len = cfg.input_len;
  const std::size_t delta = len / 3;
  Windows w{Tensor<double>({batch, 1, len}), Tensor<double>({batch, 1, len})};
  synth::GenerateOptions opts;
  opts.length = len + delta;
  for (std::size_t b = 0; b < batch; ++b) {
    const int rid = static_cast<int>((seed + b * 7) % synth::kNumRegimes);
    const auto s = synth::standardize(
        synth::generate_master(synth::regime(rid), seed, static_cast<std::uint32_t>(b), opts).values);
    for (std::size_t i = 0; i < len; ++i) {
      w.context[b * len + i] = s[i];
      w.target[b * len + i] = s[delta + i];
    }
  }
  return w;
}

}  // namespace

GradCheckResult jepa_grad_check(const ModelConfig& cfg, std::uint64_t seed, std::size_t batch,
                                const GradCheckOptions& opts) {
  ModelConfig c = cfg;
  c.mode = ModelMode::jepa;
  ModelParams<double> params = init_params<double>(c, seed);
  // Move the EMA branch off the online weights so the stop-gradient matters.
  for (std::size_t i = 0; i < params.ema.size(); ++i)
    for (double& v : params.ema.tensor(i).data()) v *= 0.9;
  const Windows w = sample_windows(c, seed, batch);
  const Tensor<double> target_z = ema_encode(params, w.target);
  return grad_check(
      [&](Tape<double>& tape, ParamSet<double>& online) {
        auto z = encode(tape, online, c, tape.constant(w.context));
        return tape.mse(predict(tape, online, c, z), tape.constant(target_z));
      },
      params.online, opts);
}

GradCheckResult ae_grad_check(const ModelConfig& cfg, std::uint64_t seed, std::size_t batch,
                              const GradCheckOptions& opts) {
  ModelConfig c = cfg;
  c.mode = ModelMode::ae;
  ModelParams<double> params = init_params<double>(c, seed);
  const Windows w = sample_windows(c, seed, batch);
  return grad_check(
      [&](Tape<double>& tape, ParamSet<double>& online) {
        auto x = tape.constant(w.context);
        return tape.mse(decode(tape, online, c, encode(tape, online, c, x)), x);
      },
      params.online, opts);
}

}  // namespace kjepa::models
