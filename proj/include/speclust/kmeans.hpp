#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "speclust/rng.hpp"
#include "speclust/types.hpp"

namespace speclust {

// Sum of weighted squared distances to the nearest centroid; unit weights when absent.
inline double kmeans_cost(const Eigen::MatrixXd& points, const CentroidSet& centroids,
                          const Eigen::VectorXd* weights = nullptr) {
  if (points.cols() != centroids.dim()) throw std::invalid_argument("kmeans_cost: dim mismatch");
  if (weights != nullptr && weights->size() != points.rows())
    throw std::invalid_argument("kmeans_cost: weight size mismatch");
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centroids.k(); ++c)
      best = std::min(best, (points.row(i) - centroids.centroids.row(c)).squaredNorm());
    total += (weights != nullptr ? (*weights)[i] : 1.0) * best;
  }
  return total;
}

namespace detail {

// nearest centroid, distance ties resolved to the lowest centroid index
inline int assign_point(const Eigen::MatrixXd& points, Index i, const Eigen::MatrixXd& centroids) {
  int best_c = 0;
  double best = (points.row(i) - centroids.row(0)).squaredNorm();
  for (Index c = 1; c < centroids.rows(); ++c) {
    const double d = (points.row(i) - centroids.row(c)).squaredNorm();
    if (d < best) {
      best = d;
      best_c = static_cast<int>(c);
    }
  }
  return best_c + 1;
}

}  // namespace detail

struct LloydOptions {
  int max_iter = 100;
  double rel_tol = 1e-6;
  std::vector<double>* cost_trace = nullptr;  // per-iteration costs, for diagnostics
};

// One Lloyd-Max run from a given initialization. Weighted input uses weighted
// barycenters in the update step. An empty cluster is re-seeded at the point
// farthest from its assigned centroid.
inline Clustering lloyd_max(const Eigen::MatrixXd& points, const CentroidSet& init,
                            const Eigen::VectorXd* weights = nullptr,
                            const LloydOptions& opts = {}) {
  const Index n = points.rows();
  const Index k = init.k();
  if (k < 1 || k > n) throw std::invalid_argument("lloyd_max: need 1 <= k <= n");
  if (points.cols() != init.dim()) throw std::invalid_argument("lloyd_max: dim mismatch");

  Eigen::MatrixXd centroids = init.centroids;
  std::vector<int> labels(static_cast<std::size_t>(n), 1);
  const auto weight_of = [&](Index i) { return weights != nullptr ? (*weights)[i] : 1.0; };

  // assignment with empty-cluster re-seeding; returns the cost of the
  // resulting (labels, centroids) pair, so labels stay Voronoi-consistent
  const auto assign_and_cost = [&]() -> double {
    for (Index i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] = detail::assign_point(points, i, centroids);
    while (true) {
      std::vector<Index> counts(static_cast<std::size_t>(k), 0);
      for (int lab : labels) counts[static_cast<std::size_t>(lab - 1)]++;
      int empty = -1;
      for (Index c = 0; c < k; ++c)
        if (counts[static_cast<std::size_t>(c)] == 0) {
          empty = static_cast<int>(c);
          break;
        }
      if (empty < 0) break;
      Index farthest = 0;
      double worst = -1.0;
      for (Index i = 0; i < n; ++i) {
        const Index c = labels[static_cast<std::size_t>(i)] - 1;
        const double d = (points.row(i) - centroids.row(c)).squaredNorm();
        if (d > worst) {
          worst = d;
          farthest = i;
        }
      }
      centroids.row(empty) = points.row(farthest);
      for (Index i = 0; i < n; ++i)
        labels[static_cast<std::size_t>(i)] = detail::assign_point(points, i, centroids);
    }
    double cost = 0.0;
    for (Index i = 0; i < n; ++i) {
      const Index c = labels[static_cast<std::size_t>(i)] - 1;
      cost += weight_of(i) * (points.row(i) - centroids.row(c)).squaredNorm();
    }
    return cost;
  };

  double cost = assign_and_cost();
  if (opts.cost_trace != nullptr) opts.cost_trace->push_back(cost);
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(k);
    for (Index i = 0; i < n; ++i) {
      const Index c = labels[static_cast<std::size_t>(i)] - 1;
      const double w = weight_of(i);
      sums.row(c) += w * points.row(i);
      mass[c] += w;
    }
    for (Index c = 0; c < k; ++c) centroids.row(c) = sums.row(c) / mass[c];

    const double prev = cost;
    cost = assign_and_cost();
    if (opts.cost_trace != nullptr) opts.cost_trace->push_back(cost);
    if (prev - cost < opts.rel_tol * std::max(prev, 1e-300)) break;
  }

  Clustering out;
  out.labels = Partition(std::move(labels), static_cast<int>(k));
  out.centroids = CentroidSet{std::move(centroids)};
  out.cost = cost;
  return out;
}

// D^2-sampling: first index uniform, then proportional to squared distance to
// the nearest already chosen sample. Returns m distinct indices; once the
// total distance vanishes the remaining draws are uniform over unchosen points.
inline std::vector<Index> d2_sample(const Eigen::MatrixXd& points, Index m, std::uint64_t seed) {
  const Index n = points.rows();
  if (m < 1 || m > n) throw std::invalid_argument("d2_sample: need 1 <= m <= n");
  Rng rng(seed);
  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(m));
  std::vector<bool> taken(static_cast<std::size_t>(n), false);

  const Index first = rng.uniform_index(n);
  chosen.push_back(first);
  taken[static_cast<std::size_t>(first)] = true;

  Eigen::VectorXd dist(n);
  for (Index i = 0; i < n; ++i) dist[i] = (points.row(i) - points.row(first)).squaredNorm();

  while (static_cast<Index>(chosen.size()) < m) {
    const double total = dist.sum();
    Index next = -1;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)] || dist[i] <= 0.0) continue;
        u -= dist[i];
        if (u <= 0.0) {
          next = i;
          break;
        }
      }
      if (next < 0) {  // numerical tail: last unchosen point with positive mass
        for (Index i = n - 1; i >= 0; --i)
          if (!taken[static_cast<std::size_t>(i)] && dist[i] > 0.0) {
            next = i;
            break;
          }
      }
    }
    if (next < 0) {  // all remaining distances vanish: uniform over unchosen
      Index remaining = 0;
      for (Index i = 0; i < n; ++i)
        if (!taken[static_cast<std::size_t>(i)]) remaining++;
      Index pick = rng.uniform_index(remaining);
      for (Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        if (pick-- == 0) {
          next = i;
          break;
        }
      }
    }
    chosen.push_back(next);
    taken[static_cast<std::size_t>(next)] = true;
    for (Index i = 0; i < n; ++i)
      dist[i] = std::min(dist[i], (points.row(i) - points.row(next)).squaredNorm());
  }
  return chosen;
}

enum class KmeansInit { uniform, d2 };

inline CentroidSet centroids_from_indices(const Eigen::MatrixXd& points,
                                          const std::vector<Index>& indices) {
  Eigen::MatrixXd c(static_cast<Index>(indices.size()), points.cols());
  for (Index r = 0; r < c.rows(); ++r) c.row(r) = points.row(indices[static_cast<std::size_t>(r)]);
  return CentroidSet{std::move(c)};
}

// Best-of-n_restarts Lloyd-Max with the chosen initialization scheme; restart
// r uses the derived seed derive_seed(seed, r).
inline Clustering lloyd_max_multi(const Eigen::MatrixXd& points, Index k, std::uint64_t seed,
                                  int n_restarts, KmeansInit init,
                                  const Eigen::VectorXd* weights = nullptr,
                                  const LloydOptions& opts = {}) {
  if (n_restarts < 1) throw std::invalid_argument("lloyd_max_multi: need n_restarts >= 1");
  Clustering best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int r = 0; r < n_restarts; ++r) {
    const std::uint64_t rseed = derive_seed(seed, static_cast<std::uint64_t>(r));
    std::vector<Index> idx;
    if (init == KmeansInit::d2) {
      idx = d2_sample(points, k, rseed);
    } else {
      Rng rng(rseed);
      idx = rng.sample_without_replacement(points.rows(), k);
    }
    Clustering run = lloyd_max(points, centroids_from_indices(points, idx), weights, opts);
    if (run.cost < best.cost) best = std::move(run);
  }
  return best;
}

// k-means++: D^2 initialization followed by Lloyd-Max.
inline Clustering kmeanspp_run(const Eigen::MatrixXd& points, Index k, std::uint64_t seed,
                               int n_restarts = 10, const Eigen::VectorXd* weights = nullptr,
                               const LloydOptions& opts = {}) {
  return lloyd_max_multi(points, k, seed, n_restarts, KmeansInit::d2, weights, opts);
}

}  // namespace speclust
