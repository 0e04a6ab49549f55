// SPDX-License-Identifier: Apache-2.0
#include "kjepa/numerics/layer_checks.hpp"

#include "kjepa/rng.hpp"

namespace kjepa {

namespace {

Tensor<double> random_tensor(Shape shape, CounterRng& rng, double away_from_zero = 0.0) {
  Tensor<double> t(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) {
    double v = rng.normal();
    if (away_from_zero > 0.0) v += v >= 0.0 ? away_from_zero : -away_from_zero;
    t[i] = v;
  }
  t.set_requires_grad(true);
  return t;
}

using V = Tape<double>::Var;

}  // namespace

std::vector<NamedGradCheck> layer_grad_checks(std::uint64_t seed, const GradCheckOptions& opts) {
  std::vector<NamedGradCheck> out;
  CounterRng rng(hash64(seed, 0x4c415945ULL));

  auto run = [&](const std::string& name, ParamSet<double>& set, const LossBuilder& f) {
    GradCheckOptions o = opts;
    o.seed = hash64(opts.seed, out.size());
    out.push_back({name, grad_check(f, set, o)});
  };
  // A fixed random projection turns every output into a scalar with a non-trivial gradient.
  auto project = [](Tape<double>& tape, V y, std::uint64_t s) {
    const Tensor<double>& v = tape.value(y);
    CounterRng r(s);
    Tensor<double> target(v.shape());
    for (std::size_t i = 0; i < target.numel(); ++i) target[i] = r.normal();
    return tape.mse(y, tape.constant(std::move(target)));
  };

  {
    ParamSet<double> s;
    s.add("x", random_tensor({2, 3, 11}, rng));
    s.add("w", random_tensor({4, 3, 5}, rng));
    s.add("b", random_tensor({4}, rng));
    run("conv1d", s, [&](Tape<double>& t, ParamSet<double>& p) {
      return project(t, t.conv1d(t.parameter(p.at("x")), t.parameter(p.at("w")),
                                 t.parameter(p.at("b")), 2, 2),
                     1);
    });
  }
  {
    ParamSet<double> s;
    s.add("x", random_tensor({2, 4, 6}, rng));
    s.add("w", random_tensor({4, 3, 5}, rng));
    s.add("b", random_tensor({3}, rng));
    run("conv_transpose1d", s, [&](Tape<double>& t, ParamSet<double>& p) {
      return project(t, t.conv_transpose1d(t.parameter(p.at("x")), t.parameter(p.at("w")),
                                           t.parameter(p.at("b")), 2, 2, 1),
                     2);
    });
  }
  {
    ParamSet<double> s;
    s.add("x", random_tensor({3, 7}, rng));
    s.add("w", random_tensor({5, 7}, rng));
    s.add("b", random_tensor({5}, rng));
    run("affine", s, [&](Tape<double>& t, ParamSet<double>& p) {
      return project(t, t.affine(t.parameter(p.at("x")), t.parameter(p.at("w")),
                                 t.parameter(p.at("b"))),
                     3);
    });
  }
  {
    ParamSet<double> s;
    s.add("x", random_tensor({3, 8}, rng, 0.1));
    run("relu", s, [&](Tape<double>& t, ParamSet<double>& p) {
      return project(t, t.relu(t.parameter(p.at("x"))), 4);
    });
  }
  {
    ParamSet<double> s;
    s.add("a", random_tensor({2, 3, 4}, rng));
    s.add("b", random_tensor({2, 12}, rng));
    run("flatten_reshape_add_scale", s, [&](Tape<double>& t, ParamSet<double>& p) {
      V a = t.flatten(t.parameter(p.at("a")));
      V b = t.reshape(t.parameter(p.at("b")), Shape{2, 12});
      return project(t, t.scale(t.add(a, b), -1.5), 5);
    });
  }
  {
    ParamSet<double> s;
    s.add("a", random_tensor({4, 6}, rng));
    s.add("b", random_tensor({4, 6}, rng));
    run("mse", s, [&](Tape<double>& t, ParamSet<double>& p) {
      return t.mse(t.parameter(p.at("a")), t.parameter(p.at("b")));
    });
  }
  return out;
}

}  // namespace kjepa
