// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>

#include "kjepa/errors.hpp"
#include "kjepa/numerics/eigen.hpp"
#include "kjepa/numerics/gradcheck.hpp"
#include "kjepa/numerics/kernels.hpp"
#include "kjepa/numerics/layer_checks.hpp"
#include "kjepa/numerics/optim.hpp"
#include "kjepa/numerics/params.hpp"
#include "kjepa/numerics/tape.hpp"
#include "kjepa/rng.hpp"
#include "oracles.hpp"

using namespace kjepa;
using TapeD = Tape<double>;

namespace {

template <typename T>
Tensor<T> randn(Shape s, std::uint64_t seed, bool grad = false) {
  Tensor<T> t(std::move(s));
  CounterRng rng(seed);
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(rng.normal());
  t.set_requires_grad(grad);
  return t;
}

template <typename T>
std::vector<T> rand_vec(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.normal());
  return v;
}

template <typename T>
double max_abs_diff(const std::vector<T>& a, const std::vector<T>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

}  // namespace

TEST_SUITE("conv1d") {
  TEST_CASE("output length chain of the encoder rows gives flatten width 6144") {
    // floor((L + 2p - k) / s) + 1 evaluated by hand for each row.
    const std::size_t rows[4][3] = {{7, 2, 3}, {5, 2, 2}, {3, 2, 1}, {3, 2, 1}};
    const std::size_t expected[4] = {384, 192, 96, 48};
    std::size_t len = 768;
    for (int i = 0; i < 4; ++i) {
      kernels::Conv1dGeometry g;
      g.in_length = len;
      g.kernel_size = rows[i][0];
      g.stride = rows[i][1];
      g.padding = rows[i][2];
      CHECK(g.out_length() == expected[i]);
      len = g.out_length();
    }
    CHECK(128 * len == 6144);
  }

  TEST_CASE("zero input yields the bias in every position") {
    TapeD t;
    auto x = t.constant(Tensor<double>({2, 3, 10}));
    auto w = t.constant(randn<double>({4, 3, 5}, 1));
    Tensor<double> b({4}, std::vector<double>{0.5, -1.0, 2.0, 0.0});
    auto y = t.conv1d(x, w, t.constant(b), 2, 2);
    const auto& yv = t.value(y);
    REQUIRE(yv.shape() == Shape{2, 4, 5});
    for (std::size_t i = 0; i < yv.numel(); ++i) CHECK(yv[i] == b[(i / 5) % 4]);
  }

  TEST_CASE("unit kernel is the identity") {
    TapeD t;
    auto xv = randn<double>({1, 1, 17}, 2);
    auto y = t.conv1d(t.constant(xv), t.constant(Tensor<double>({1, 1, 1}, 1.0)), std::nullopt, 1, 0);
    CHECK(t.value(y).values() == xv.values());
  }

  TEST_CASE("channel mismatch is a dimension error") {
    TapeD t;
    auto x = t.constant(Tensor<double>({1, 2, 8}));
    auto w = t.constant(Tensor<double>({1, 3, 3}));
    CHECK_THROWS_AS(t.conv1d(x, w, std::nullopt, 1, 1), DimensionError);
    CHECK_THROWS_AS(t.conv1d(x, t.constant(Tensor<double>({1, 2, 11})), std::nullopt, 1, 1),
                    DimensionError);
  }

  TEST_CASE("forward matches the direct definition") {
    const std::size_t cin = 3, cout = 4, len = 19, k = 5, s = 2, p = 2;
    const auto x = rand_vec<double>(cin * len, 3);
    const auto w = rand_vec<double>(cout * cin * k, 4);
    TapeD t;
    auto y = t.conv1d(t.constant(Tensor<double>({1, cin, len}, x)),
                      t.constant(Tensor<double>({cout, cin, k}, w)), std::nullopt, s, p);
    const auto& yv = t.value(y);
    const std::size_t lout = yv.dim(2);
    CHECK(lout == 10);
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t l = 0; l < lout; ++l)
        CHECK(yv[o * lout + l] == doctest::Approx(oracle::conv_at(x, cin, len, w, o, k, s, p, l)).epsilon(1e-12));
  }

  TEST_CASE("bias-free convolution is linear") {
    const double a = 1.7, b = -0.6;
    auto x = randn<float>({2, 3, 40}, 5), y = randn<float>({2, 3, 40}, 6);
    auto w = randn<float>({5, 3, 7}, 7);
    Tensor<float> mix(x.shape());
    for (std::size_t i = 0; i < mix.numel(); ++i) mix[i] = static_cast<float>(a * x[i] + b * y[i]);
    Tape<float> t;
    auto wv = t.constant(w);
    const auto cx = t.value(t.conv1d(t.constant(x), wv, std::nullopt, 2, 3));
    const auto cy = t.value(t.conv1d(t.constant(y), wv, std::nullopt, 2, 3));
    const auto cm = t.value(t.conv1d(t.constant(mix), wv, std::nullopt, 2, 3));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < cm.numel(); ++i) {
      const double lin = a * cx[i] + b * cy[i];
      num = std::max(num, std::fabs(cm[i] - lin));
      den = std::max(den, std::fabs(lin));
    }
    CHECK(num / den <= 1e-5);
  }
}

TEST_SUITE("kernels") {
  template <typename T>
  void compare_conv(const kernels::Conv1dGeometry& g, double tol) {
    const auto x = rand_vec<T>(g.input_size(), 11), w = rand_vec<T>(g.weight_size(), 12);
    const auto bias = rand_vec<T>(g.out_channels, 13), gy = rand_vec<T>(g.output_size(), 14);
    std::vector<T> y0(g.output_size()), y1(g.output_size());
    kernels::reference::conv1d_forward<T>(g, x, w, bias, y0);
    kernels::parallel::conv1d_forward<T>(g, x, w, bias, y1);
    CHECK(max_abs_diff(y0, y1) <= tol);

    std::vector<T> gx0(g.input_size(), T{1}), gx1(g.input_size(), T{1});
    kernels::reference::conv1d_backward_input<T>(g, gy, w, gx0);
    kernels::parallel::conv1d_backward_input<T>(g, gy, w, gx1);
    CHECK(max_abs_diff(gx0, gx1) <= tol);

    std::vector<T> gw0(g.weight_size(), T{1}), gw1(g.weight_size(), T{1});
    std::vector<T> gb0(g.out_channels, T{1}), gb1(g.out_channels, T{1});
    kernels::reference::conv1d_backward_weight<T>(g, x, gy, gw0, gb0);
    kernels::parallel::conv1d_backward_weight<T>(g, x, gy, gw1, gb1);
    CHECK(max_abs_diff(gw0, gw1) <= tol * 10);
    CHECK(max_abs_diff(gb0, gb1) <= tol * 10);
  }

  template <typename T>
  void compare_affine(const kernels::AffineGeometry& g, double tol) {
    const auto x = rand_vec<T>(g.batch * g.in_features, 21);
    const auto w = rand_vec<T>(g.out_features * g.in_features, 22);
    const auto bias = rand_vec<T>(g.out_features, 23);
    const auto gy = rand_vec<T>(g.batch * g.out_features, 24);
    std::vector<T> y0(g.batch * g.out_features), y1(y0.size());
    kernels::reference::affine_forward<T>(g, x, w, bias, y0);
    kernels::parallel::affine_forward<T>(g, x, w, bias, y1);
    CHECK(max_abs_diff(y0, y1) <= tol);
    std::vector<T> gx0(x.size(), T{0}), gx1(x.size(), T{0});
    kernels::reference::affine_backward_input<T>(g, gy, w, gx0);
    kernels::parallel::affine_backward_input<T>(g, gy, w, gx1);
    CHECK(max_abs_diff(gx0, gx1) <= tol);
    std::vector<T> gw0(w.size(), T{0}), gw1(w.size(), T{0}), gb0(g.out_features, T{0}),
        gb1(g.out_features, T{0});
    kernels::reference::affine_backward_weight<T>(g, x, gy, gw0, gb0);
    kernels::parallel::affine_backward_weight<T>(g, x, gy, gw1, gb1);
    CHECK(max_abs_diff(gw0, gw1) <= tol);
    CHECK(max_abs_diff(gb0, gb1) <= tol);
  }

  TEST_CASE("parallel conv kernels agree with the serial reference") {
    const kernels::Conv1dGeometry shapes[] = {
        {3, 1, 16, 768, 7, 2, 3}, {2, 16, 32, 384, 5, 2, 2}, {2, 64, 128, 96, 3, 2, 1},
        {1, 5, 3, 9, 4, 3, 0},    {4, 2, 7, 33, 1, 1, 0},    {2, 3, 37, 50, 3, 1, 1},
    };
    for (const auto& g : shapes) {
      CAPTURE(g.in_channels);
      CAPTURE(g.out_channels);
      compare_conv<double>(g, 1e-10);
      compare_conv<float>(g, 2e-3);
    }
  }

  TEST_CASE("parallel affine kernels agree with the serial reference") {
    const kernels::AffineGeometry shapes[] = {{256, 6144, 64}, {7, 13, 5}, {1, 1, 1}, {33, 64, 32}};
    for (const auto& g : shapes) {
      compare_affine<double>(g, 1e-9);
      compare_affine<float>(g, 2e-3);
    }
  }

  TEST_CASE("parallel kernels are bit-identical across repeated calls") {
    const kernels::Conv1dGeometry g{4, 16, 32, 200, 5, 2, 2};
    const auto x = rand_vec<float>(g.input_size(), 31), w = rand_vec<float>(g.weight_size(), 32);
    const auto gy = rand_vec<float>(g.output_size(), 33);
    std::vector<float> a(g.weight_size(), 0.0f), b(g.weight_size(), 0.0f), ba(32, 0.0f),
        bb(32, 0.0f);
    kernels::parallel::conv1d_backward_weight<float>(g, x, gy, a, ba);
    kernels::parallel::conv1d_backward_weight<float>(g, x, gy, b, bb);
    CHECK(a == b);
    CHECK(ba == bb);
  }
}

TEST_SUITE("tape") {
  TEST_CASE("quadratic example: d/dw mean((w x - y)^2) = 30 at w=2, x=3, y=1") {
    Tensor<double> w({1, 1}, 2.0);
    w.set_requires_grad(true);
    TapeD t;
    auto pred = t.affine(t.constant(Tensor<double>({1, 1}, 3.0)), t.parameter(w), std::nullopt);
    auto loss = t.mse(pred, t.constant(Tensor<double>({1, 1}, 1.0)));
    CHECK(t.value(loss)[0] == 25.0);
    t.backward(loss);
    CHECK(w.grad()[0] == 30.0);
  }

  TEST_CASE("parameter the loss does not depend on gets no gradient") {
    Tensor<double> p({3}, 1.0), q({3}, 2.0);
    p.set_requires_grad(true);
    q.set_requires_grad(true);
    TapeD t;
    t.parameter(p);
    auto loss = t.mse(t.parameter(q), t.constant(Tensor<double>({3})));
    t.backward(loss);
    for (double g : p.grad()) CHECK(g == 0.0);
    CHECK(q.has_grad());
  }

  TEST_CASE("relu passes no gradient at negative pre-activations") {
    Tensor<double> x({1, 4}, std::vector<double>{-2.0, -0.5, 0.5, 3.0});
    x.set_requires_grad(true);
    TapeD t;
    auto loss = t.mse(t.relu(t.parameter(x)), t.constant(Tensor<double>({1, 4})));
    t.backward(loss);
    CHECK(x.grad()[0] == 0.0);
    CHECK(x.grad()[1] == 0.0);
    CHECK(x.grad()[2] == doctest::Approx(2.0 * 0.5 / 4));
    CHECK(x.grad()[3] == doctest::Approx(2.0 * 3.0 / 4));
  }

  TEST_CASE("fan-out accumulates contributions") {
    Tensor<double> a({2}, std::vector<double>{1.0, -2.0});
    a.set_requires_grad(true);
    TapeD t;
    auto v = t.parameter(a);
    auto loss = t.mse(t.add(v, t.scale(v, 2.0)), t.constant(Tensor<double>({2})));
    t.backward(loss);
    // loss = mean((3a)^2) -> dL/da = 9a.
    CHECK(a.grad()[0] == doctest::Approx(9.0));
    CHECK(a.grad()[1] == doctest::Approx(-18.0));
  }

  TEST_CASE("backward contract errors") {
    Tensor<double> a({2}, 1.0);
    a.set_requires_grad(true);
    TapeD t;
    auto v = t.parameter(a);
    CHECK_THROWS_AS(t.backward(v), ContractError);
    auto loss = t.mse(v, t.constant(Tensor<double>({2})));
    t.backward(loss);
    CHECK_THROWS_AS(t.backward(loss), ContractError);
    t.zero_grad();
    CHECK_NOTHROW(t.backward(loss));

    TapeD inf(TapeD::Mode::inference);
    auto l2 = inf.mse(inf.parameter(a), inf.constant(Tensor<double>({2})));
    CHECK_THROWS_AS(inf.backward(l2), ContractError);
  }

  TEST_CASE("non-finite loss is a numeric error") {
    TapeD t;
    Tensor<double> a({1}, std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(t.mse(t.constant(a), t.constant(Tensor<double>({1}))), NumericError);
  }

  TEST_CASE("two backward passes over the same data give bit-identical grads") {
    auto run = [] {
      Tensor<float> w = randn<float>({8, 3, 5}, 41, true);
      Tensor<float> x = randn<float>({4, 3, 64}, 42);
      Tape<float> t;
      auto y = t.relu(t.conv1d(t.constant(x), t.parameter(w), std::nullopt, 2, 2));
      auto loss = t.mse(t.flatten(y), t.constant(Tensor<float>({4, 8 * 32})));
      t.backward(loss);
      return std::vector<float>(w.grad().begin(), w.grad().end());
    };
    CHECK(run() == run());
  }

  TEST_CASE("conv_transpose1d is the adjoint of conv1d") {
    // <conv(x), y> == <x, conv_T(y)> for shared weights.
    auto x = randn<double>({2, 3, 20}, 51);
    auto w = randn<double>({4, 3, 5}, 52);
    TapeD t;
    const auto cx = t.value(t.conv1d(t.constant(x), t.constant(w), std::nullopt, 2, 2));
    auto y = randn<double>(cx.shape(), 53);
    const auto ty = t.value(t.conv_transpose1d(t.constant(y), t.constant(w), std::nullopt, 2, 2, 1));
    REQUIRE(ty.shape() == x.shape());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < cx.numel(); ++i) lhs += cx[i] * y[i];
    for (std::size_t i = 0; i < x.numel(); ++i) rhs += x[i] * ty[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_SUITE("grad_check") {
  TEST_CASE("linear least squares is exact to 1e-6") {
    ParamSet<double> ps;
    ps.add("w", randn<double>({3, 6}, 61, true));
    ps.add("b", randn<double>({3}, 62, true));
    const auto x = randn<double>({10, 6}, 63), y = randn<double>({10, 3}, 64);
    const auto r = grad_check(
        [&](TapeD& t, ParamSet<double>& p) {
          return t.mse(t.affine(t.constant(x), t.parameter(p.at("w")), t.parameter(p.at("b"))),
                       t.constant(y));
        },
        ps);
    CHECK(r.max_rel_error <= 1e-6);
    CHECK(r.checked == 16 + 3);
  }

  TEST_CASE("no parameters means zero error") {
    ParamSet<double> ps;
    const auto r = grad_check([](TapeD& t, ParamSet<double>&) {
      return t.mse(t.constant(Tensor<double>({1}, 1.0)), t.constant(Tensor<double>({1})));
    }, ps);
    CHECK(r.max_rel_error == 0.0);
  }

  TEST_CASE("step outside [1e-5, 1e-3] is rejected") {
    ParamSet<double> ps;
    ps.add("w", randn<double>({2}, 1, true));
    auto f = [](TapeD& t, ParamSet<double>& p) {
      return t.mse(t.parameter(p.at("w")), t.constant(Tensor<double>({2})));
    };
    CHECK_THROWS_AS(grad_check(f, ps, {.step = 1e-2}), ContractError);
    CHECK_THROWS_AS(grad_check(f, ps, {.step = 1e-7}), ContractError);
  }

  TEST_CASE("probes straddling a ReLU kink are discarded") {
    // relu(w) at w = 0 has a one-sided derivative; the central difference would halve it.
    ParamSet<double> ps;
    Tensor<double> w({1, 2}, std::vector<double>{0.0, 0.5});
    w.set_requires_grad(true);
    ps.add("w", std::move(w));
    const auto r = grad_check(
        [](TapeD& t, ParamSet<double>& p) {
          return t.mse(t.relu(t.parameter(p.at("w"))), t.constant(Tensor<double>({1, 2}, -1.0)));
        },
        ps);
    CHECK(r.kink_skipped == 1);
    CHECK(r.checked == 1);
    CHECK(r.max_rel_error <= 1e-8);
  }

  TEST_CASE("relu pattern tracks activation masks only") {
    auto pattern = [](double a, double b) {
      TapeD t(TapeD::Mode::inference);
      t.relu(t.constant(Tensor<double>({2}, std::vector<double>{a, b})));
      return t.relu_pattern();
    };
    CHECK(pattern(1.0, -1.0) == pattern(2.0, -3.0));
    CHECK(pattern(1.0, -1.0) != pattern(-1.0, -1.0));
  }

  TEST_CASE("every tape operation passes in isolation at 1e-6") {
    for (const auto& [name, r] : layer_grad_checks(7)) {
      CAPTURE(name);
      CHECK(r.max_rel_error <= 1e-6);
      CHECK(r.checked > 0);
    }
  }
}

TEST_SUITE("adam") {
  ParamSet<double> single(double value, double grad) {
    ParamSet<double> ps;
    Tensor<double> t({1}, value);
    t.set_requires_grad(true);
    ps.add("p", std::move(t)).grad_buffer()[0] = grad;
    return ps;
  }

  TEST_CASE("first step with unit gradient moves by lr / (1 + eps)") {
    auto ps = single(0.0, 1.0);
    AdamState<double> st;
    adam_step(st, ps);
    // m_hat = 0.1 / 0.1 = 1, v_hat = 0.001 / 0.001 = 1.
    CHECK(ps.at("p")[0] == doctest::Approx(-0.001 / (1.0 + 1e-8)).epsilon(1e-12));
    CHECK(ps.at("p")[0] == doctest::Approx(-0.000999999990).epsilon(1e-9));
    CHECK(st.step == 1);
    CHECK(ps.at("p").grad()[0] == 0.0);
  }

  TEST_CASE("zero gradient leaves parameters unchanged") {
    auto ps = single(0.25, 0.0);
    AdamState<double> st;
    for (int i = 0; i < 3; ++i) adam_step(st, ps);
    CHECK(ps.at("p")[0] == 0.25);
    CHECK(st.step == 3);
  }

  TEST_CASE("constant gradient never grows the step") {
    auto ps = single(0.0, 0.5);
    AdamState<double> st;
    double prev = 0.0, last = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
      ps.at("p").grad_buffer()[0] = 0.5;
      adam_step(st, ps);
      const double delta = std::fabs(ps.at("p")[0] - prev);
      CHECK(delta <= last * (1 + 1e-12));
      last = delta;
      prev = ps.at("p")[0];
    }
  }

  TEST_CASE("trainable parameter without a gradient is a contract error") {
    ParamSet<double> ps;
    ps.add("p", randn<double>({2}, 1, true));
    AdamState<double> st;
    CHECK_THROWS_AS(adam_step(st, ps), ContractError);
  }

  TEST_CASE("frozen parameters are skipped") {
    ParamSet<double> ps;
    ps.add("frozen", Tensor<double>({2}, 3.0));
    AdamState<double> st;
    CHECK_NOTHROW(adam_step(st, ps));
    CHECK(ps.at("frozen")[0] == 3.0);
  }
}

TEST_SUITE("ema") {
  ParamSet<double> named(double v) {
    ParamSet<double> ps;
    ps.add("encoder.w", Tensor<double>({3}, v));
    return ps;
  }

  TEST_CASE("alpha 1 keeps, alpha 0 copies, alpha 0.996 blends") {
    auto online = named(0.0);
    auto t1 = named(1.0), t0 = named(1.0), tp = named(1.0);
    ema_update(t1, online, 1.0);
    ema_update(t0, online, 0.0);
    ema_update(tp, online, 0.996);
    CHECK(t1.at("encoder.w")[0] == 1.0);
    CHECK(t0.at("encoder.w")[0] == 0.0);
    CHECK(tp.at("encoder.w")[0] == doctest::Approx(0.996).epsilon(1e-15));
  }

  TEST_CASE("distance to online contracts by exactly alpha") {
    ParamSet<double> online, target;
    online.add("w", randn<double>({50}, 71));
    target.add("w", randn<double>({50}, 72));
    auto dist = [&] {
      double s = 0.0;
      for (std::size_t i = 0; i < 50; ++i) {
        const double d = target.at("w")[i] - online.at("w")[i];
        s += d * d;
      }
      return std::sqrt(s);
    };
    double prev = dist();
    for (int i = 0; i < 100; ++i) {
      ema_update(target, online, 0.996);
      const double now = dist();
      CHECK(now / prev == doctest::Approx(0.996).epsilon(1e-6));
      prev = now;
    }
  }

  TEST_CASE("prefix selects the online subset and mismatches are contract errors") {
    ParamSet<double> online;
    online.add("encoder.w", Tensor<double>({3}, 2.0));
    online.add("predictor.M", Tensor<double>({2, 2}, 1.0));
    auto target = named(0.0);
    CHECK_NOTHROW(ema_update(target, online, 0.5, "encoder."));
    CHECK(target.at("encoder.w")[0] == 1.0);
    CHECK_THROWS_AS(ema_update(target, online, 0.5), ContractError);
    CHECK_THROWS_AS(ema_update(target, online, 1.5, "encoder."), ContractError);
    ParamSet<double> wrong;
    wrong.add("encoder.w", Tensor<double>({4}, 0.0));
    CHECK_THROWS_AS(ema_update(wrong, online, 0.5, "encoder."), ContractError);
  }
}

TEST_SUITE("eigen") {
  TEST_CASE("identity of size 32 has all eigenvalues 1") {
    std::vector<double> m(32 * 32, 0.0);
    for (std::size_t i = 0; i < 32; ++i) m[i * 32 + i] = 1.0;
    const auto ev = eigenvalues(m, 32);
    REQUIRE(ev.size() == 32);
    for (const auto& l : ev) {
      CHECK(l.real() == 1.0);
      CHECK(l.imag() == 0.0);
    }
  }

  TEST_CASE("quarter rotation gives +i and -i") {
    const std::vector<double> m{0.0, -1.0, 1.0, 0.0};
    const auto ev = eigenvalues(m, 2);
    REQUIRE(ev.size() == 2);
    CHECK(std::fabs(ev[0].real()) < 1e-14);
    CHECK(std::fabs(ev[1].real()) < 1e-14);
    CHECK(std::fabs(std::fabs(ev[0].imag()) - 1.0) < 1e-14);
    CHECK(ev[0].imag() == doctest::Approx(-ev[1].imag()));
  }

  TEST_CASE("trace and LU determinant identities on random matrices") {
    for (std::size_t n : {2u, 8u, 32u}) {
      for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto m = oracle::random_matrix(n, hash64(n, seed));
        const auto ev = eigenvalues(m, n);
        std::complex<double> sum = 0.0, prod = 1.0;
        for (const auto& l : ev) {
          sum += l;
          prod *= l;
        }
        const double det = oracle::det_lu(m, n);
        CAPTURE(n);
        CAPTURE(seed);
        CHECK(std::fabs(sum.real() - oracle::trace(m, n)) <= 1e-8);
        CHECK(std::fabs(sum.imag()) <= 1e-8);
        CHECK(std::fabs(prod.real() - det) <= 1e-6 * std::fabs(det));
      }
    }
  }

  TEST_CASE("results are sorted by descending magnitude and deterministic") {
    const auto m = oracle::random_matrix(16, 99);
    const auto a = eigenvalues(m, 16), b = eigenvalues(m, 16);
    CHECK(a == b);
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(std::abs(a[i - 1]) >= std::abs(a[i]));
  }

  TEST_CASE("upper triangular matrix returns its diagonal") {
    const std::vector<double> m{3.0, 1.0, 2.0, 0.0, -5.0, 4.0, 0.0, 0.0, 0.5};
    const auto ev = eigenvalues(m, 3);
    CHECK(ev[0].real() == doctest::Approx(-5.0));
    CHECK(ev[1].real() == doctest::Approx(3.0));
    CHECK(ev[2].real() == doctest::Approx(0.5));
  }

  TEST_CASE("bad input") {
    CHECK_THROWS_AS(eigenvalues(std::vector<double>(65 * 65, 0.0), 65), ContractError);
    CHECK_THROWS_AS(eigenvalues(std::vector<double>{1.0, std::nan(""), 0.0, 1.0}, 2), NumericError);
    CHECK_THROWS_AS(eigenvalues(std::vector<double>{1.0, 2.0, 3.0}, 2), DimensionError);
  }
}
