// SPDX-License-Identifier: Apache-2.0
#include "kjepa/analysis/clustering.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

#include "kjepa/errors.hpp"
#include "kjepa/rng.hpp"

namespace kjepa::analysis {

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

struct Points {
  std::span<const double> data;
  std::size_t n, d;
  const double* row(std::size_t i) const { return data.data() + i * d; }
};

std::vector<double> seed_plus_plus(const Points& p, std::size_t k, CounterRng& rng) {
  std::vector<double> c(k * p.d);
  std::vector<double> best(p.n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(p.n);
  for (std::size_t c_i = 0; c_i < k; ++c_i) {
    std::copy_n(p.row(pick), p.d, c.begin() + static_cast<std::ptrdiff_t>(c_i * p.d));
    double total = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) {
      best[i] = std::min(best[i], sq_dist(p.row(i), &c[c_i * p.d], p.d));
      total += best[i];
    }
    if (c_i + 1 == k) break;
    if (total <= 0.0) {
      pick = rng.below(p.n);
      continue;
    }
    double r = rng.uniform() * total;
    pick = p.n - 1;
    for (std::size_t i = 0; i < p.n; ++i) {
      r -= best[i];
      if (r < 0.0) {
        pick = i;
        break;
      }
    }
  }
  return c;
}

KMeansResult lloyd(const Points& p, std::size_t k, std::vector<double> centroids,
                   std::size_t max_iter) {
  KMeansResult r;
  r.assignments.assign(p.n, std::numeric_limits<std::uint32_t>::max());
  std::vector<double> dist(p.n);
  std::vector<std::size_t> counts(k);
  for (std::size_t it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < p.n; ++i) {
      std::uint32_t arg = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = sq_dist(p.row(i), &centroids[c * p.d], p.d);
        if (dd < bd) {
          bd = dd;
          arg = static_cast<std::uint32_t>(c);
        }
      }
      dist[i] = bd;
      if (r.assignments[i] != arg) {
        r.assignments[i] = arg;
        changed = true;
      }
    }
    r.iterations = it + 1;

    std::fill(centroids.begin(), centroids.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < p.n; ++i) {
      const std::size_t c = r.assignments[i];
      ++counts[c];
      for (std::size_t j = 0; j < p.d; ++j) centroids[c * p.d + j] += p.row(i)[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Steal the point currently worst served by its own centroid.
        const auto far = static_cast<std::size_t>(
            std::max_element(dist.begin(), dist.end()) - dist.begin());
        std::copy_n(p.row(far), p.d, centroids.begin() + static_cast<std::ptrdiff_t>(c * p.d));
        dist[far] = 0.0;
        changed = true;
        continue;
      }
      for (std::size_t j = 0; j < p.d; ++j) centroids[c * p.d + j] /= static_cast<double>(counts[c]);
    }
    if (!changed) break;
  }

  r.inertia = 0.0;
  for (std::size_t i = 0; i < p.n; ++i)
    r.inertia += sq_dist(p.row(i), &centroids[r.assignments[i] * p.d], p.d);
  r.centroids = std::move(centroids);
  return r;
}

}  // namespace

KMeansResult kmeans(std::span<const double> points, std::size_t dim, const KMeansOptions& opts) {
  if (dim == 0 || points.size() % dim != 0)
    throw DimensionError("kmeans: " + std::to_string(points.size()) +
                         " values is not a whole number of rows of width " + std::to_string(dim));
  const Points p{points, points.size() / dim, dim};
  if (opts.clusters == 0) throw ContractError("kmeans: need at least one cluster");
  if (p.n < opts.clusters)
    throw ContractError("kmeans: " + std::to_string(p.n) + " points for " +
                        std::to_string(opts.clusters) + " clusters");
  if (opts.restarts == 0 || opts.max_iterations == 0)
    throw ContractError("kmeans: restarts and max_iterations must be positive");

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    CounterRng rng(hash64(opts.seed, r));
    KMeansResult run = lloyd(p, opts.clusters, seed_plus_plus(p, opts.clusters, rng),
                             opts.max_iterations);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

double purity(std::span<const std::uint32_t> assignments, std::span<const std::uint16_t> labels) {
  if (assignments.size() != labels.size())
    throw DimensionError("purity: " + std::to_string(assignments.size()) + " assignments vs " +
                         std::to_string(labels.size()) + " labels");
  if (assignments.empty()) return 0.0;
  std::map<std::uint32_t, std::map<std::uint16_t, std::size_t>> table;
  for (std::size_t i = 0; i < labels.size(); ++i) ++table[assignments[i]][labels[i]];
  std::size_t hit = 0;
  for (const auto& [cluster, row] : table) {
    std::size_t m = 0;
    for (const auto& [label, count] : row) m = std::max(m, count);
    hit += m;
  }
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

}  // namespace kjepa::analysis
