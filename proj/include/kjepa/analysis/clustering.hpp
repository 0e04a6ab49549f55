// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace kjepa::analysis {

struct KMeansOptions {
  std::size_t clusters = 18;
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<std::uint32_t> assignments;
  /// clusters x dim, row-major.
  std::vector<double> centroids;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

/// K-means++ seeding followed by Lloyd iterations until assignments stop
/// changing or max_iterations; the restart with the lowest inertia wins.
/// Clusters that empty out are re-seeded from the point farthest from its centroid.
/// `points` holds n rows of width `dim`. Throws ContractError if n < clusters.
KMeansResult kmeans(std::span<const double> points, std::size_t dim, const KMeansOptions& opts);

/// (1/N) * sum over clusters of the largest label count inside the cluster.
double purity(std::span<const std::uint32_t> assignments, std::span<const std::uint16_t> labels);

}  // namespace kjepa::analysis
