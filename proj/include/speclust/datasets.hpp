#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "speclust/graph.hpp"
#include "speclust/rng.hpp"
#include "speclust/types.hpp"

namespace speclust {

struct LabeledPoints {
  PointSet points;
  Partition truth;
};

// Two interleaved half-circles of n/2 points each with Gaussian noise.
// Moon 1 is the upper half of the unit circle at the origin; moon 2 the lower
// half of the unit circle centered at (1, 0.5).
inline LabeledPoints generate_two_moons(Index n, double noise, std::uint64_t seed) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("generate_two_moons: n must be even, >= 4");
  const Index half = n / 2;
  Rng rng(seed);
  Eigen::MatrixXd data(n, 2);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < half; ++i) {
    const double t = half > 1 ? M_PI * static_cast<double>(i) / static_cast<double>(half - 1) : 0.0;
    data(i, 0) = std::cos(t);
    data(i, 1) = std::sin(t);
    labels[static_cast<std::size_t>(i)] = 1;
    data(half + i, 0) = 1.0 - std::cos(t);
    data(half + i, 1) = 0.5 - std::sin(t);
    labels[static_cast<std::size_t>(half + i)] = 2;
  }
  if (noise > 0.0)
    for (Index i = 0; i < n; ++i) {
      data(i, 0) += noise * rng.normal();
      data(i, 1) += noise * rng.normal();
    }
  return {PointSet(std::move(data)), Partition(std::move(labels), 2)};
}

struct SbmGraph {
  SimilarityGraph graph;
  Partition truth;
  bool connected = true;
};

// Unit-weight undirected stochastic block model with near-equal block sizes.
inline SbmGraph generate_sbm(Index n, int k, double p_in, double p_out, std::uint64_t seed) {
  if (n < 2 || k < 1 || k > n) throw std::invalid_argument("generate_sbm: bad n or k");
  if (!(p_in >= p_out) || p_out < 0.0 || p_in > 1.0)
    throw std::invalid_argument("generate_sbm: need 0 <= p_out <= p_in <= 1");
  Rng rng(seed);
  std::vector<int> labels(static_cast<std::size_t>(n));
  const Index base = n / k, extra = n % k;
  Index pos = 0;
  for (int b = 0; b < k; ++b) {
    const Index size = base + (b < extra ? 1 : 0);
    for (Index i = 0; i < size; ++i) labels[static_cast<std::size_t>(pos++)] = b + 1;
  }

  std::vector<Eigen::Triplet<double>> triplets;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double p =
          labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? p_in : p_out;
      if (rng.uniform() < p) {
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
        triplets.emplace_back(static_cast<int>(j), static_cast<int>(i), 1.0);
      }
    }
  SpMat w(n, n);
  w.setFromTriplets(triplets.begin(), triplets.end());
  SbmGraph out{SimilarityGraph::from_adjacency(std::move(w)), Partition(std::move(labels), k),
               true};

  // simple BFS connectivity flag
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Index> stack{0};
  seen[0] = true;
  Index visited = 1;
  while (!stack.empty()) {
    const Index u = stack.back();
    stack.pop_back();
    for (SpMat::InnerIterator it(out.graph.adjacency, u); it; ++it)
      if (!seen[static_cast<std::size_t>(it.col())]) {
        seen[static_cast<std::size_t>(it.col())] = true;
        stack.push_back(it.col());
        ++visited;
      }
  }
  out.connected = (visited == n);
  return out;
}

namespace detail {

// Hungarian algorithm (potentials form), minimizing total cost of a square matrix.
// Returns assignment row -> column.
inline std::vector<int> hungarian_min(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] > 0)
      row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)]) - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

// Permutation-minimal fraction of differing labels, via optimal assignment on
// the confusion matrix. Differing cluster counts are handled by zero padding.
inline double misclustering_rate(const Partition& pred, const Partition& truth) {
  if (pred.n() != truth.n()) throw std::invalid_argument("misclustering_rate: size mismatch");
  const Index n = pred.n();
  const int k = std::max(pred.k, truth.k);
  Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(k, k);
  for (Index i = 0; i < n; ++i)
    confusion(pred.labels[static_cast<std::size_t>(i)] - 1,
              truth.labels[static_cast<std::size_t>(i)] - 1) += 1.0;
  // maximize agreement = minimize (max - confusion)
  const double top = confusion.maxCoeff();
  const auto assignment = detail::hungarian_min(Eigen::MatrixXd(top - confusion.array()));
  double agree = 0.0;
  for (int r = 0; r < k; ++r) agree += confusion(r, assignment[static_cast<std::size_t>(r)]);
  return 1.0 - agree / static_cast<double>(n);
}

}  // namespace speclust
