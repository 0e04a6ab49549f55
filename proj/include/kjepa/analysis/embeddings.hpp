// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "kjepa/models/networks.hpp"
#include "kjepa/synthgen/dataset.hpp"

namespace kjepa::analysis {

/// N latent vectors of width `dim`, row-major, with their regime labels.
struct EmbeddingSet {
  std::size_t dim = 0;
  std::vector<double> rows;
  std::vector<std::uint16_t> labels;
  std::uint64_t source_digest = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return {rows.data() + i * dim, dim}; }
};

/// Throws ContractError if empty, non-finite, or if rows and labels disagree.
void validate(const EmbeddingSet& e);

enum class Encoder { online, ema };

/// Embeds every pair of `ds` (context or target window) in storage order.
EmbeddingSet embed_split(models::ModelParams<float>& params, const synth::Dataset& ds,
                         models::Window which, Encoder encoder = Encoder::online,
                         std::size_t batch_size = 256);

/// CSV with header `id,label,z0,...,z{k-1}`; values use %.9g so floats round-trip.
void export_embeddings(const EmbeddingSet& e, const std::filesystem::path& path);
EmbeddingSet import_embeddings(const std::filesystem::path& path);

/// Mean over pairs of ||f(target) - f(context)|| / (||f(context)|| + 1e-12).
double pathwise_invariance(models::ModelParams<float>& params, const synth::Dataset& ds,
                           Encoder encoder = Encoder::online, std::size_t batch_size = 256);

/// Same quantity from precomputed context and target embeddings of the same pairs.
double pathwise_invariance(const EmbeddingSet& context, const EmbeddingSet& target);

}  // namespace kjepa::analysis
