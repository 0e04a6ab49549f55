// SPDX-License-Identifier: Apache-2.0
#include "kjepa/analysis/diagnostics.hpp"

#include <cmath>
#include <numeric>

#include "kjepa/errors.hpp"
#include "kjepa/numerics/eigen.hpp"
#include "kjepa/synthgen/generator.hpp"
#include "kjepa/synthgen/regimes.hpp"

namespace kjepa::analysis {

PredictorMatrix PredictorMatrix::from_params(const models::ModelParams<float>& params) {
  if (params.config.mode != models::ModelMode::jepa ||
      params.config.predictor != models::PredictorKind::linear)
    throw ContractError("predictor matrix requires a JEPA model with a linear predictor");
  const Tensor<float>& m = params.online.at("predictor.M");
  PredictorMatrix pm;
  pm.k = params.config.latent_dim;
  pm.m.assign(m.values().begin(), m.values().end());
  return pm;
}

namespace {

void check(const PredictorMatrix& pm) {
  if (pm.k == 0 || pm.m.size() != pm.k * pm.k)
    throw DimensionError("predictor matrix: " + std::to_string(pm.m.size()) +
                         " entries for k = " + std::to_string(pm.k));
  for (double v : pm.m)
    if (!std::isfinite(v)) throw NumericError("predictor matrix has non-finite entries");
}

}  // namespace

PredictorMatrix fit_linear_predictor(models::ModelParams<float>& params,
                                     const EmbeddingSet& embeddings) {
  validate(embeddings);
  const std::size_t k = params.config.latent_dim;
  const std::size_t n = embeddings.size();
  if (embeddings.dim != k) throw DimensionError("fit_linear_predictor: embedding width != k");

  Tensor<float> z({n, k});
  for (std::size_t i = 0; i < z.numel(); ++i) z[i] = static_cast<float>(embeddings.rows[i]);
  Tape<float> tape(Tape<float>::Mode::inference);
  const Tensor<float> y = tape.value(models::predict(tape, params.online, params.config,
                                                    tape.constant(std::move(z))));

  // Normal equations G X = B with G = Z^T Z and B = Z^T Y; then M = X^T.
  std::vector<double> g(k * k, 0.0), b(k * k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto zi = embeddings.row(i);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) {
        g[r * k + c] += zi[r] * zi[c];
        b[r * k + c] += zi[r] * y[i * k + c];
      }
  }
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(g[r * k + col]) > std::abs(g[piv * k + col])) piv = r;
    if (std::abs(g[piv * k + col]) < 1e-12)
      throw NumericError("fit_linear_predictor: embeddings are rank deficient");
    for (std::size_t c = 0; c < k; ++c) {
      std::swap(g[col * k + c], g[piv * k + c]);
      std::swap(b[col * k + c], b[piv * k + c]);
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = g[r * k + col] / g[col * k + col];
      for (std::size_t c = 0; c < k; ++c) {
        g[r * k + c] -= f * g[col * k + c];
        b[r * k + c] -= f * b[col * k + c];
      }
    }
  }
  PredictorMatrix pm;
  pm.k = k;
  pm.m.resize(k * k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) pm.m[c * k + r] = b[r * k + c] / g[r * k + r];
  return pm;
}

MDiagnostics m_diagnostics(const PredictorMatrix& pm) {
  check(pm);
  const std::size_t k = pm.k;
  double norm = 0.0, off_id = 0.0, skew = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double v = pm.m[i * k + j];
      const double d = v - (i == j ? 1.0 : 0.0);
      const double s = v - pm.m[j * k + i];
      norm += v * v;
      off_id += d * d;
      skew += s * s;
    }
  if (norm == 0.0) throw NumericError("predictor matrix is zero");
  MDiagnostics out;
  out.frob_rel = std::sqrt(off_id) / std::sqrt(norm);
  out.skew_rel = std::sqrt(skew) / std::sqrt(norm);
  for (const auto& lambda : eigenvalues(pm.m, k)) out.eigen_mags.push_back(std::abs(lambda));
  return out;
}

CentroidAction centroid_action(const PredictorMatrix& pm, std::span<const double> centroids) {
  check(pm);
  const std::size_t k = pm.k;
  if (centroids.empty() || centroids.size() % k != 0)
    throw DimensionError("centroid_action: centroids are not rows of width " + std::to_string(k));
  CentroidAction out;
  for (std::size_t c = 0; c * k < centroids.size(); ++c) {
    const double* x = centroids.data() + c * k;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double mx = 0.0;
      for (std::size_t j = 0; j < k; ++j) mx += pm.m[i * k + j] * x[j];
      num += (mx - x[i]) * (mx - x[i]);
      den += x[i] * x[i];
    }
    if (std::sqrt(den) < 1e-12)
      throw NumericError("centroid_action: centroid " + std::to_string(c) + " has zero norm");
    out.errors.push_back(std::sqrt(num) / std::sqrt(den));
  }
  out.mean = std::accumulate(out.errors.begin(), out.errors.end(), 0.0) /
             static_cast<double>(out.errors.size());
  return out;
}

namespace {

Tensor<double> stack(const std::vector<const std::vector<float>*>& rows, std::size_t len) {
  Tensor<double> t({rows.size(), 1, len});
  for (std::size_t b = 0; b < rows.size(); ++b)
    for (std::size_t i = 0; i < len; ++i) t[b * len + i] = (*rows[b])[i];
  return t;
}

}  // namespace

DecompositionResult loss_decomposition_check(const models::ModelParams<float>& params,
                                             const synth::Dataset& split,
                                             const synth::DataConfig& data,
                                             const DecompositionOptions& opts) {
  if (opts.draws == 0 || opts.batch_size == 0)
    throw ConfigError("decomposition: draws and batch_size must be positive");
  if (split.context_len() != data.context_len || split.context_len() != params.config.input_len)
    throw ConfigError("decomposition: split, data config and model disagree on window length");

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (!opts.deterministic_only || synth::regime(split.label(i)).deterministic()) keep.push_back(i);
  if (keep.empty()) throw ConfigError("decomposition: no pairs left after the regime restriction");

  models::ModelParams<double> p = params.cast<double>();
  const bool has_ema = !p.ema.empty();
  const bool has_predictor = p.config.mode == models::ModelMode::jepa;
  ParamSet<double>& psi_set = has_ema ? p.ema : p.online;
  const std::size_t k = p.config.latent_dim;

  auto embed = [&](ParamSet<double>& set, Tensor<double> x) {
    Tape<double> tape(Tape<double>::Mode::inference);
    return tape.value(models::encode(tape, set, p.config, tape.constant(std::move(x))));
  };
  auto predict = [&](Tensor<double> x) {
    Tape<double> tape(Tape<double>::Mode::inference);
    auto z = models::encode(tape, p.online, p.config, tape.constant(std::move(x)));
    if (has_predictor) z = models::predict(tape, p.online, p.config, z);
    return tape.value(z);
  };
  auto sq_err = [&](const Tensor<double>& a, const Tensor<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
  };

  synth::GenerateOptions gen;
  gen.length = data.master_len;
  double loss_sum = 0.0, term_sum = 0.0;
  for (std::size_t start = 0; start < keep.size(); start += opts.batch_size) {
    const std::size_t n = std::min(opts.batch_size, keep.size() - start);
    const std::span<const std::size_t> idx(keep.data() + start, n);

    std::vector<std::vector<float>> ctx(n), stored(n);
    for (std::size_t b = 0; b < n; ++b) {
      ctx[b].assign(split.context(idx[b]).begin(), split.context(idx[b]).end());
      stored[b].assign(split.target(idx[b]).begin(), split.target(idx[b]).end());
    }
    std::vector<const std::vector<float>*> ptr(n);
    for (std::size_t b = 0; b < n; ++b) ptr[b] = &ctx[b];
    const Tensor<double> pred = predict(stack(ptr, data.context_len));
    for (std::size_t b = 0; b < n; ++b) ptr[b] = &stored[b];
    loss_sum += sq_err(pred, embed(psi_set, stack(ptr, data.context_len)));

    // Welford running mean of psi over continuation draws; exact when all draws coincide.
    Tensor<double> mean({n, k});
    std::vector<std::vector<float>> cont(n);
    for (std::size_t d = 0; d < opts.draws; ++d) {
      gen.continuation = synth::ContinuationDraw{data.context_len, d + 1};
      for (std::size_t b = 0; b < n; ++b) {
        const std::size_t i = idx[b];
        const synth::MasterSequence m = synth::generate_master(
            synth::regime(split.label(i)), data.global_seed, split.seq_index(i), gen);
        cont[b] = synth::make_window_pair(synth::standardize(m.values), data.context_len,
                                          data.delta, split.label(i), split.seq_index(i))
                      .target;
        ptr[b] = &cont[b];
      }
      const Tensor<double> z = embed(psi_set, stack(ptr, data.context_len));
      for (std::size_t j = 0; j < z.numel(); ++j)
        mean[j] += (z[j] - mean[j]) / static_cast<double>(d + 1);
    }
    term_sum += sq_err(pred, mean);
  }

  DecompositionResult r;
  r.pairs = keep.size();
  const double denom = static_cast<double>(keep.size() * k);
  r.loss = loss_sum / denom;
  r.mean_term = term_sum / denom;
  r.gap = std::abs(r.loss - r.mean_term) / std::max(r.loss, 1e-12);
  return r;
}

}  // namespace kjepa::analysis
