// SPDX-License-Identifier: Apache-2.0
#include "kjepa/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kjepa/rng.hpp"

namespace kjepa {

namespace {

struct Evaluation {
  double value;
  std::uint64_t pattern;
};

Evaluation evaluate(const LossBuilder& f, ParamSet<double>& params) {
  Tape<double> tape(Tape<double>::Mode::inference);
  const double v = tape.value(f(tape, params))[0];
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite loss evaluation");
  return {v, tape.relu_pattern()};
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& f, ParamSet<double>& params,
                           const GradCheckOptions& opts) {
  if (!(opts.step >= 1e-5 && opts.step <= 1e-3))
    throw ContractError("grad_check: step must lie in [1e-5, 1e-3]");
  GradCheckResult result;
  if (params.total_numel() == 0) return result;

  for (std::size_t i = 0; i < params.size(); ++i) params.tensor(i).drop_grad();
  std::uint64_t base_pattern = 0;
  {
    Tape<double> tape;
    auto loss = f(tape, params);
    if (!std::isfinite(tape.value(loss)[0]))
      throw NumericError("grad_check: non-finite loss evaluation");
    tape.backward(loss);
    base_pattern = tape.relu_pattern();
  }

  CounterRng rng(hash64(opts.seed, 0x6772616463686bULL));
  const double h = opts.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<double>& p = params.tensor(i);
    if (!p.requires_grad() || p.numel() == 0) continue;
    const std::vector<double> analytic =
        p.has_grad() ? std::vector<double>(p.grad().begin(), p.grad().end())
                     : std::vector<double>(p.numel(), 0.0);

    // Returns false when the probe straddles a kink.
    auto probe = [&](std::size_t j) {
      const double saved = p[j];
      p[j] = saved + h;
      const Evaluation fp = evaluate(f, params);
      p[j] = saved - h;
      const Evaluation fm = evaluate(f, params);
      p[j] = saved;
      if (fp.pattern != base_pattern || fm.pattern != base_pattern) {
        ++result.kink_skipped;
        return false;
      }
      const double numeric = (fp.value - fm.value) / (2.0 * h);
      const double a = analytic[j];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      const double rel = std::fabs(a - numeric) / denom;
      ++result.checked;
      if (rel >= result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = params.name(i);
        result.worst_index = j;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
      return true;
    };

    if (p.numel() <= opts.coords_per_tensor) {
      for (std::size_t j = 0; j < p.numel(); ++j) probe(j);
    } else {
      for (std::size_t n = 0; n < opts.coords_per_tensor; ++n)
        for (std::size_t attempt = 0; attempt <= opts.kink_retries; ++attempt)
          if (probe(rng.below(p.numel()))) break;
    }
  }
  return result;
}

}  // namespace kjepa
