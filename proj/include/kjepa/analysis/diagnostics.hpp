// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "kjepa/analysis/embeddings.hpp"
#include "kjepa/models/networks.hpp"
#include "kjepa/synthgen/dataset.hpp"

namespace kjepa::analysis {

/// Square k x k matrix in row-major double precision.
struct PredictorMatrix {
  std::size_t k = 0;
  std::vector<double> m;

  /// Copies "predictor.M" out of a linear-predictor model.
  static PredictorMatrix from_params(const models::ModelParams<float>& params);
};

struct MDiagnostics {
  double frob_rel = 0.0;  ///< ||M - I||_F / ||M||_F
  double skew_rel = 0.0;  ///< ||M - M^T||_F / ||M||_F
  std::vector<double> eigen_mags;  ///< descending
};

/// Least-squares linear map M minimising sum_i ||M z_i - g(z_i)||^2 over the given
/// embeddings, for predictors that are not linear. Throws NumericError when the
/// embeddings do not span the latent space.
PredictorMatrix fit_linear_predictor(models::ModelParams<float>& params,
                                     const EmbeddingSet& embeddings);

MDiagnostics m_diagnostics(const PredictorMatrix& pm);

struct CentroidAction {
  std::vector<double> errors;  ///< ||M c_i - c_i|| / ||c_i||
  double mean = 0.0;
};

/// `centroids` holds rows of width pm.k. Throws NumericError on a centroid with norm below 1e-12.
CentroidAction centroid_action(const PredictorMatrix& pm, std::span<const double> centroids);

struct DecompositionOptions {
  /// Continuation draws averaged to estimate E[psi(x_{t+delta}) | x_t].
  std::size_t draws = 8;
  bool deterministic_only = true;
  std::size_t batch_size = 64;
};

struct DecompositionResult {
  double loss = 0.0;         ///< L: mean ||g(f(x_t)) - psi(x_{t+delta})||^2 on stored targets
  double mean_term = 0.0;    ///< Term 1: mean ||g(f(x_t)) - E[psi(x_{t+delta}) | x_t]||^2
  double gap = 0.0;          ///< |L - Term1| / max(L, 1e-12)
  std::size_t pairs = 0;
};

/// Regenerates each pair's master sequence from `data` and replaces the innovations after
/// the context window with independent continuation draws to estimate the conditional
/// expectation of the target embedding. psi is the EMA encoder when present (the JEPA
/// target), otherwise the online encoder; g is the predictor, or the identity for models
/// without one. Evaluated in double precision.
/// Throws ConfigError if no pairs survive the deterministic-regime restriction.
DecompositionResult loss_decomposition_check(const models::ModelParams<float>& params,
                                             const synth::Dataset& split,
                                             const synth::DataConfig& data,
                                             const DecompositionOptions& opts = {});

}  // namespace kjepa::analysis
