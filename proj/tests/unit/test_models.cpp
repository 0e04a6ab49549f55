// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "kjepa/errors.hpp"
#include "kjepa/models/checkpoint.hpp"
#include "kjepa/models/config.hpp"
#include "kjepa/models/gradcheck_suite.hpp"
#include "kjepa/models/networks.hpp"
#include "kjepa/rng.hpp"
#include "kjepa/synthgen/dataset.hpp"

using namespace kjepa;
using namespace kjepa::models;
namespace fs = std::filesystem;

namespace {

Tensor<float> random_input(std::size_t batch, std::uint64_t seed, std::size_t len = 768) {
  Tensor<float> x({batch, 1, len});
  CounterRng rng(seed);
  for (std::size_t i = 0; i < x.numel(); ++i) x[i] = static_cast<float>(rng.normal());
  return x;
}

Tensor<float> run_encode(ModelParams<float>& p, const Tensor<float>& x) {
  Tape<float> t(Tape<float>::Mode::inference);
  return t.value(encode(t, p.online, p.config, t.constant(x)));
}

Tensor<float> run_predict(ModelParams<float>& p, const Tensor<float>& z) {
  Tape<float> t(Tape<float>::Mode::inference);
  return t.value(predict(t, p.online, p.config, t.constant(z)));
}

const synth::DatasetSplits& small_splits() {
  static const auto splits = [] {
    synth::DataConfig c;
    c.seqs_per_regime = 10;
    return synth::generate_splits(c);
  }();
  return splits;
}

ModelConfig ae_config() {
  ModelConfig c;
  c.mode = ModelMode::ae;
  return c;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("conv lengths and flatten width") {
    ModelConfig c;
    const auto L = c.conv_lengths();
    CHECK(L == std::array<std::size_t, 5>{768, 384, 192, 96, 48});
    CHECK(c.flatten_width() == 6144);
  }

  TEST_CASE("validation and enum parsing") {
    ModelConfig c;
    c.latent_dim = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = ModelConfig{};
    c.input_len = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    CHECK(parse_mode("ae") == ModelMode::ae);
    CHECK(parse_predictor("mlp") == PredictorKind::mlp);
    CHECK(parse_predictor_init("random") == PredictorInit::random);
    CHECK(parse_head("single_layer") == HeadKind::single_layer);
    CHECK(to_string(HeadKind::two_layer) == "two_layer");
    CHECK_THROWS_AS(parse_mode("vae"), ConfigError);
  }

  TEST_CASE("digest covers architecture but not initialization") {
    ModelConfig a, b;
    b.predictor_init = PredictorInit::random;
    CHECK(a.digest() == b.digest());
    b.latent_dim = 16;
    CHECK(a.digest() != b.digest());
    ModelConfig ae1 = ae_config(), ae2 = ae_config();
    ae2.predictor = PredictorKind::mlp;
    CHECK(ae1.digest() == ae2.digest());
    CHECK(ae1.digest() != a.digest());
  }
}

TEST_SUITE("init") {
  TEST_CASE("closed-form parameter counts") {
    ModelConfig c;
    const std::size_t conv = 1 * 16 * 7 + 16 + 16 * 32 * 5 + 32 + 32 * 64 * 3 + 64 + 64 * 128 * 3 + 128;
    const std::size_t head = 6144 * 64 + 64 + 64 * 32 + 32;
    CHECK(encoder_param_count(c) == conv + head);
    CHECK(predictor_param_count(c) == 32 * 32);
    auto p = init_params<float>(c, 0);
    CHECK(p.online.total_numel() == conv + head + 32 * 32);
    CHECK(p.ema.total_numel() == conv + head);
    CHECK(p.online.at("predictor.M").shape() == Shape{32, 32});
    CHECK_FALSE(p.online.contains("predictor.M.bias"));

    c.predictor = PredictorKind::mlp;
    CHECK(predictor_param_count(c) == 32 * 64 + 64 + 64 * 64 + 64 + 64 * 32 + 32);
    c = ModelConfig{};
    c.head = HeadKind::single_layer;
    CHECK(encoder_param_count(c) == conv + 6144 * 32 + 32);
  }

  TEST_CASE("identity predictor, EMA copy and same-seed determinism") {
    auto p = init_params<float>(ModelConfig{}, 3);
    const auto& m = p.online.at("predictor.M");
    for (std::size_t i = 0; i < 32; ++i)
      for (std::size_t j = 0; j < 32; ++j) CHECK(m[i * 32 + j] == (i == j ? 1.0f : 0.0f));
    REQUIRE(p.ema.size() == p.online.size() - 1);
    for (std::size_t i = 0; i < p.ema.size(); ++i) {
      CHECK(p.ema.name(i) == p.online.name(i));
      CHECK(p.ema.tensor(i).values() == p.online.tensor(i).values());
      CHECK_FALSE(p.ema.tensor(i).requires_grad());
    }
    auto q = init_params<float>(ModelConfig{}, 3);
    for (std::size_t i = 0; i < p.online.size(); ++i)
      CHECK(p.online.tensor(i).values() == q.online.tensor(i).values());
    auto r = init_params<float>(ModelConfig{}, 4);
    CHECK(r.online.at("encoder.conv1.weight").values() != p.online.at("encoder.conv1.weight").values());
  }

  TEST_CASE("fan-in bounds and predictor independence") {
    ModelConfig c;
    c.predictor_init = PredictorInit::random;
    auto p = init_params<float>(c, 0);
    const double bound = 1.0 / std::sqrt(32.0);
    double frob_dev = 0.0;
    const auto& m = p.online.at("predictor.M");
    for (std::size_t i = 0; i < m.numel(); ++i) {
      CHECK(std::fabs(m[i]) <= bound);
      const double d = m[i] - (i % 33 == 0 ? 1.0 : 0.0);
      frob_dev += d * d;
    }
    CHECK(std::sqrt(frob_dev) > 1.0);
    const auto& w = p.online.at("encoder.conv1.weight");
    for (float v : w.values()) CHECK(std::fabs(v) <= 1.0 / std::sqrt(7.0));
    auto id = init_params<float>(ModelConfig{}, 0);
    CHECK(id.online.at("encoder.head2.weight").values() == p.online.at("encoder.head2.weight").values());
  }

  TEST_CASE("autoencoder has a decoder and no EMA") {
    auto p = init_params<float>(ae_config(), 0);
    CHECK(p.ema.empty());
    CHECK(p.online.contains("decoder.deconv4.weight"));
    CHECK_FALSE(p.online.contains("predictor.M"));
  }
}

TEST_SUITE("encode") {
  TEST_CASE("zero input gives the bias-only forward for every row") {
    auto p = init_params<float>(ModelConfig{}, 0);
    const auto z = run_encode(p, Tensor<float>({3, 1, 768}));
    REQUIRE(z.shape() == Shape{3, 32});
    for (std::size_t j = 0; j < 32; ++j) {
      CHECK(z[j] == z[32 + j]);
      CHECK(z[j] == z[64 + j]);
    }
  }

  TEST_CASE("identical windows give identical rows and repeated calls are bit-identical") {
    auto p = init_params<float>(ModelConfig{}, 0);
    const auto one = random_input(1, 5);
    Tensor<float> many({4, 1, 768});
    for (std::size_t b = 0; b < 4; ++b)
      std::copy(one.values().begin(), one.values().end(), many.values().begin() + b * 768);
    const auto z = run_encode(p, many);
    for (std::size_t b = 1; b < 4; ++b)
      for (std::size_t j = 0; j < 32; ++j) CHECK(z[b * 32 + j] == z[j]);
    CHECK(run_encode(p, many).values() == z.values());
  }

  TEST_CASE("wrong input length is a dimension error") {
    auto p = init_params<float>(ModelConfig{}, 0);
    CHECK_THROWS_AS(run_encode(p, random_input(1, 0, 700)), DimensionError);
    CHECK_THROWS_AS(run_encode(p, Tensor<float>({1, 2, 768})), DimensionError);
  }

  TEST_CASE("EMA encoding equals the online encoding at step 0") {
    auto p = init_params<float>(ModelConfig{}, 0);
    const auto x = random_input(2, 9);
    CHECK(ema_encode(p, x).values() == run_encode(p, x).values());
  }
}

TEST_SUITE("predict") {
  TEST_CASE("identity and doubled linear predictors") {
    auto p = init_params<float>(ModelConfig{}, 0);
    const auto z = run_encode(p, random_input(3, 1));
    CHECK(run_predict(p, z).values() == z.values());
    auto& m = p.online.at("predictor.M");
    for (auto& v : m.values()) v *= 2.0f;
    const auto y = run_predict(p, z);
    for (std::size_t i = 0; i < z.numel(); ++i) CHECK(y[i] == 2.0f * z[i]);
  }

  TEST_CASE("linear predictor is linear to 1e-5") {
    ModelConfig c;
    c.predictor_init = PredictorInit::random;
    auto p = init_params<float>(c, 0);
    const auto z1 = run_encode(p, random_input(2, 1)), z2 = run_encode(p, random_input(2, 2));
    const float a = 1.3f, b = -0.4f;
    Tensor<float> mix(z1.shape());
    for (std::size_t i = 0; i < mix.numel(); ++i) mix[i] = a * z1[i] + b * z2[i];
    const auto y = run_predict(p, mix), y1 = run_predict(p, z1), y2 = run_predict(p, z2);
    for (std::size_t i = 0; i < y.numel(); ++i)
      CHECK(std::fabs(y[i] - (a * y1[i] + b * y2[i])) <= 1e-5 * std::max(1.0f, std::fabs(y[i])));
  }

  TEST_CASE("MLP with zero weights outputs the final bias") {
    ModelConfig c;
    c.predictor = PredictorKind::mlp;
    auto p = init_params<float>(c, 0);
    for (const char* n : {"predictor.fc1.weight", "predictor.fc2.weight", "predictor.fc3.weight"})
      std::fill(p.online.at(n).values().begin(), p.online.at(n).values().end(), 0.0f);
    const auto y = run_predict(p, run_encode(p, random_input(2, 3)));
    const auto& bias = p.online.at("predictor.fc3.bias");
    for (std::size_t i = 0; i < y.numel(); ++i) CHECK(y[i] == bias[i % 32]);
  }
}

TEST_SUITE("losses") {
  TEST_CASE("mean over batch and dims: difference (3, 4) gives 12.5") {
    Tape<float> t;
    auto l = t.mse(t.constant(Tensor<float>({1, 2}, std::vector<float>{3.0f, 4.0f})),
                   t.constant(Tensor<float>({1, 2})));
    CHECK(t.value(l)[0] == 12.5f);
  }

  TEST_CASE("perfect self-prediction has zero loss") {
    auto p = init_params<float>(ModelConfig{}, 0);
    const auto x = random_input(2, 4);
    Tape<float> t;
    CHECK(t.value(jepa_loss(t, p, x, x))[0] == 0.0f);
  }

  TEST_CASE("freshly initialized JEPA on overlapping windows has finite nonzero loss") {
    auto p = init_params<float>(ModelConfig{}, 0);
    const auto& ds = small_splits().train;
    std::vector<std::size_t> idx(16);
    std::iota(idx.begin(), idx.end(), 0);
    Tape<float> t;
    const float loss = t.value(jepa_loss(t, p, gather_batch<float>(ds, idx, Window::context),
                                         gather_batch<float>(ds, idx, Window::target)))[0];
    CHECK(std::isfinite(loss));
    CHECK(loss > 0.0f);
  }

  TEST_CASE("stop-gradient: EMA tensors receive no gradient") {
    auto p = init_params<float>(ModelConfig{}, 0);
    for (auto& v : p.ema.at("encoder.head2.bias").values()) v += 0.5f;
    Tape<float> t;
    auto l = jepa_loss(t, p, random_input(2, 1), random_input(2, 2));
    t.backward(l);
    for (std::size_t i = 0; i < p.ema.size(); ++i)
      for (float g : p.ema.tensor(i).grad()) CHECK(g == 0.0f);
    CHECK(p.online.at("predictor.M").has_grad());
    CHECK(p.online.at("encoder.conv1.weight").has_grad());
  }

  TEST_CASE("decoder reconstructs the full window length") {
    auto p = init_params<float>(ae_config(), 0);
    Tape<float> t(Tape<float>::Mode::inference);
    auto z = encode(t, p.online, p.config, t.constant(random_input(2, 3)));
    CHECK(t.value(decode(t, p.online, p.config, z)).shape() == Shape{2, 1, 768});
  }

  TEST_CASE("zero decoder output gives loss near the unit input variance") {
    auto p = init_params<float>(ae_config(), 0);
    auto& w = p.online.at("decoder.deconv4.weight");
    std::fill(w.values().begin(), w.values().end(), 0.0f);
    std::fill(p.online.at("decoder.deconv4.bias").values().begin(),
              p.online.at("decoder.deconv4.bias").values().end(), 0.0f);
    const auto& ds = small_splits().train;
    std::vector<std::size_t> idx(ds.size());
    std::iota(idx.begin(), idx.end(), 0);
    const auto x = gather_batch<float>(ds, idx, Window::context);
    double sq = 0.0;
    for (float v : x.values()) sq += double(v) * v;
    Tape<float> t(Tape<float>::Mode::inference);
    const float loss = t.value(ae_loss(t, p, x))[0];
    CHECK(loss == doctest::Approx(sq / x.numel()).epsilon(1e-4));
    CHECK(loss == doctest::Approx(1.0).epsilon(0.1));
  }

  TEST_CASE("untrained autoencoder starts near loss 1 and is invariant to batch order") {
    auto p = init_params<float>(ae_config(), 0);
    const auto& ds = small_splits().train;
    std::vector<std::size_t> idx(64);
    std::iota(idx.begin(), idx.end(), 0);
    Tape<float> t(Tape<float>::Mode::inference);
    const float l1 = t.value(ae_loss(t, p, gather_batch<float>(ds, idx, Window::context)))[0];
    std::reverse(idx.begin(), idx.end());
    const float l2 = t.value(ae_loss(t, p, gather_batch<float>(ds, idx, Window::context)))[0];
    CHECK(l1 == doctest::Approx(1.0).epsilon(0.2));
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-6));
  }
}

TEST_SUITE("gradients") {
  TEST_CASE("whole-model finite-difference checks") {
    const auto jepa = jepa_grad_check(ModelConfig{}, 1);
    CHECK(jepa.max_rel_error <= 1e-4);
    CHECK(jepa.checked >= 100);
    GradCheckOptions coarse;
    coarse.step = 1e-3;
    CHECK(ae_grad_check(ae_config(), 1, 2, coarse).max_rel_error <= 1e-3);
    ModelConfig mlp;
    mlp.predictor = PredictorKind::mlp;
    CHECK(jepa_grad_check(mlp, 2).max_rel_error <= 1e-4);
    ModelConfig single;
    single.head = HeadKind::single_layer;
    CHECK(jepa_grad_check(single, 3).max_rel_error <= 1e-4);
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip preserves every tensor") {
    const auto dir = fs::temp_directory_path() / "kjepa_test_models";
    fs::remove_all(dir);
    auto p = init_params<float>(ModelConfig{}, 11);
    p.ema.at("encoder.head2.bias")[0] = 42.0f;
    save_checkpoint(p, dir / "nested" / "m.kjc");
    const auto q = load_checkpoint(dir / "nested" / "m.kjc", ModelConfig{});
    REQUIRE(q.online.size() == p.online.size());
    for (std::size_t i = 0; i < p.online.size(); ++i) {
      CHECK(q.online.name(i) == p.online.name(i));
      CHECK(q.online.tensor(i).values() == p.online.tensor(i).values());
      CHECK(q.online.tensor(i).shape() == p.online.tensor(i).shape());
    }
    CHECK(q.ema.at("encoder.head2.bias")[0] == 42.0f);

    ModelConfig other;
    other.latent_dim = 16;
    CHECK_THROWS_AS(load_checkpoint(dir / "nested" / "m.kjc", other), ConfigError);
    CHECK_THROWS_AS(load_checkpoint(dir / "nested" / "m.kjc", ae_config()), ConfigError);

    fs::resize_file(dir / "nested" / "m.kjc", fs::file_size(dir / "nested" / "m.kjc") - 4);
    CHECK_THROWS_AS(load_checkpoint(dir / "nested" / "m.kjc", ModelConfig{}), IoError);
    CHECK_THROWS_AS(load_checkpoint(dir / "absent.kjc", ModelConfig{}), IoError);
  }
}
