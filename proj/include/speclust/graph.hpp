#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "speclust/rng.hpp"
#include "speclust/types.hpp"

namespace speclust {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Sparse symmetric weighted adjacency. Immutable after construction.
struct SimilarityGraph {
  SpMat adjacency;          // zero diagonal, W == W^T
  Eigen::VectorXd degrees;  // row sums of W
  Index edge_count = 0;

  Index n() const { return adjacency.rows(); }

  static SimilarityGraph from_adjacency(SpMat w) {
    SimilarityGraph g;
    w.prune(0.0);
    w.makeCompressed();
    g.adjacency = std::move(w);
    g.degrees = g.adjacency * Eigen::VectorXd::Ones(g.adjacency.cols());
    g.edge_count = g.adjacency.nonZeros() / 2;
    return g;
  }

  static SimilarityGraph from_dense(const Eigen::MatrixXd& w) {
    SpMat sp = w.sparseView();
    return from_adjacency(std::move(sp));
  }
};

struct LaplacianMatrix {
  LaplacianVariant variant = LaplacianVariant::combinatorial;
  SpMat matrix;
  Eigen::VectorXd degrees;

  Index n() const { return matrix.rows(); }

  // valid upper bound for ||L||_2: exact 2 for the normalized variants,
  // Gershgorin (2 * max degree) for the combinatorial one
  double lambda_max_bound() const {
    if (variant == LaplacianVariant::combinatorial) return 2.0 * degrees.maxCoeff();
    return 2.0;
  }
};

namespace detail {

inline double rbf_kernel(const Eigen::MatrixXd& pts, Index i, Index j, double sigma) {
  const double d2 = (pts.row(i) - pts.row(j)).squaredNorm();
  return std::exp(-d2 / (sigma * sigma));
}

}  // namespace detail

// Median pairwise distance on an (at most) 1000-point deterministic subsample.
inline double sigma_heuristic(const PointSet& points, Index subsample = 1000) {
  const Index n = points.n();
  std::vector<Index> idx;
  if (n <= subsample) {
    idx.resize(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
  } else {
    idx.reserve(static_cast<std::size_t>(subsample));
    for (Index i = 0; i < subsample; ++i) idx.push_back(i * n / subsample);
  }
  std::vector<double> dists;
  dists.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      dists.push_back((points.data.row(idx[a]) - points.data.row(idx[b])).norm());
  if (dists.empty()) throw std::invalid_argument("sigma_heuristic: need at least 2 points");
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2),
                   dists.end());
  const double median = dists[dists.size() / 2];
  if (!(median > 0.0))
    throw std::invalid_argument("sigma_heuristic: degenerate point set (median distance 0)");
  return median;
}

// RBF kernel + column-wise top-k_nn sparsification + symmetrization
// W = K_sp + K_sp^T. Ties at the k_nn-th largest value keep the lowest index.
// k_nn >= n-1 keeps every off-diagonal entry (dense graph).
inline SimilarityGraph build_knn_graph(const PointSet& points, double sigma, Index k_nn) {
  const Index n = points.n();
  if (!(sigma > 0.0)) throw std::invalid_argument("build_knn_graph: sigma must be positive");
  if (k_nn < 1 || k_nn >= n)
    throw std::invalid_argument("build_knn_graph: need 1 <= k_nn < n");
  const Index keep = k_nn;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n * keep));
  std::vector<Index> order(static_cast<std::size_t>(n));
  Eigen::VectorXd col(n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i)
      col[i] = (i == j) ? 0.0 : detail::rbf_kernel(points.data, i, j, sigma);
    std::iota(order.begin(), order.end(), Index{0});
    std::nth_element(order.begin(), order.begin() + keep, order.end(),
                     [&](Index a, Index b) { return col[a] > col[b] || (col[a] == col[b] && a < b); });
    std::sort(order.begin(), order.begin() + keep);
    for (Index t = 0; t < keep; ++t) {
      const Index i = order[static_cast<std::size_t>(t)];
      if (col[i] > 0.0) triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), col[i]);
    }
  }

  SpMat k_sp(n, n);
  k_sp.setFromTriplets(triplets.begin(), triplets.end());
  SpMat w = k_sp + SpMat(k_sp.transpose());
  auto graph = SimilarityGraph::from_adjacency(std::move(w));
  for (Index i = 0; i < n; ++i)
    if (!(graph.degrees[i] > 0.0))
      throw std::runtime_error("build_knn_graph: isolated node " + std::to_string(i) +
                               " (raise k_nn or sigma)");
  return graph;
}

inline LaplacianMatrix laplacian(const SimilarityGraph& graph, LaplacianVariant variant) {
  const Index n = graph.n();
  LaplacianMatrix lap;
  lap.variant = variant;
  lap.degrees = graph.degrees;

  if (variant != LaplacianVariant::combinatorial) {
    for (Index i = 0; i < n; ++i)
      if (!(graph.degrees[i] > 0.0))
        throw std::runtime_error("laplacian: zero-degree node " + std::to_string(i) +
                                 " with " + to_string(variant) + " variant");
  }

  SpMat identity(n, n);
  identity.setIdentity();
  switch (variant) {
    case LaplacianVariant::combinatorial: {
      SpMat d(n, n);
      d.reserve(Eigen::VectorXi::Constant(static_cast<int>(n), 1));
      for (Index i = 0; i < n; ++i) d.insert(i, i) = graph.degrees[i];
      lap.matrix = SpMat(d - graph.adjacency);
      break;
    }
    case LaplacianVariant::normalized: {
      SpMat dinv_sqrt(n, n);
      dinv_sqrt.reserve(Eigen::VectorXi::Constant(static_cast<int>(n), 1));
      for (Index i = 0; i < n; ++i) dinv_sqrt.insert(i, i) = 1.0 / std::sqrt(graph.degrees[i]);
      lap.matrix = SpMat(identity - SpMat(dinv_sqrt * graph.adjacency * dinv_sqrt));
      break;
    }
    case LaplacianVariant::random_walk: {
      SpMat dinv(n, n);
      dinv.reserve(Eigen::VectorXi::Constant(static_cast<int>(n), 1));
      for (Index i = 0; i < n; ++i) dinv.insert(i, i) = 1.0 / graph.degrees[i];
      lap.matrix = SpMat(identity - SpMat(dinv * graph.adjacency));
      break;
    }
  }
  lap.matrix.makeCompressed();
  return lap;
}

enum class CutKind { cut, rcut, ncut };

inline double cut_cost(const SimilarityGraph& graph, const Partition& partition, CutKind kind) {
  if (partition.n() != graph.n()) throw std::invalid_argument("cut_cost: size mismatch");
  partition.validate();
  const int k = partition.k;
  std::vector<double> crossing(static_cast<std::size_t>(k), 0.0);
  std::vector<double> volume(static_cast<std::size_t>(k), 0.0);
  const auto sizes = partition.cluster_sizes();

  for (Index i = 0; i < graph.n(); ++i) {
    const auto li = static_cast<std::size_t>(partition.labels[static_cast<std::size_t>(i)] - 1);
    volume[li] += graph.degrees[i];
    for (SpMat::InnerIterator it(graph.adjacency, i); it; ++it) {
      const auto lj = static_cast<std::size_t>(partition.labels[static_cast<std::size_t>(it.col())] - 1);
      if (li != lj) crossing[li] += it.value();
    }
  }

  double total = 0.0;
  for (int l = 0; l < k; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    double denom = 1.0;
    if (kind == CutKind::rcut) denom = static_cast<double>(sizes[ul]);
    if (kind == CutKind::ncut) denom = volume[ul];
    if (kind != CutKind::cut && !(denom > 0.0))
      throw std::runtime_error("cut_cost: empty cluster " + std::to_string(l + 1) +
                               " gives division by zero");
    total += crossing[ul] / denom;
  }
  return 0.5 * total;
}

// trace(C^T L C) with C the size-normalized indicator matrix; equals 2*rcut.
inline double rcut_trace(const SimilarityGraph& graph, const Partition& partition) {
  if (partition.n() != graph.n()) throw std::invalid_argument("rcut_trace: size mismatch");
  const int k = partition.k;
  const auto sizes = partition.cluster_sizes();
  for (int l = 0; l < k; ++l)
    if (sizes[static_cast<std::size_t>(l)] == 0)
      throw std::runtime_error("rcut_trace: empty cluster " + std::to_string(l + 1));

  // z^T L z = vol(V) - w(V, V) for an indicator vector z of V
  std::vector<double> volume(static_cast<std::size_t>(k), 0.0);
  std::vector<double> within(static_cast<std::size_t>(k), 0.0);
  for (Index i = 0; i < graph.n(); ++i) {
    const auto li = static_cast<std::size_t>(partition.labels[static_cast<std::size_t>(i)] - 1);
    volume[li] += graph.degrees[i];
    for (SpMat::InnerIterator it(graph.adjacency, i); it; ++it) {
      const auto lj = static_cast<std::size_t>(partition.labels[static_cast<std::size_t>(it.col())] - 1);
      if (li == lj) within[li] += it.value();
    }
  }
  double trace = 0.0;
  for (int l = 0; l < k; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    trace += (volume[ul] - within[ul]) / static_cast<double>(sizes[ul]);
  }
  return trace;
}

// Gaussian random projection to d_out dimensions; expected squared norms preserved.
inline PointSet jl_project(const PointSet& points, Index d_out, std::uint64_t seed) {
  if (d_out < 1 || d_out > points.d())
    throw std::invalid_argument("jl_project: need 1 <= d_out <= d");
  Rng rng(seed);
  const Eigen::MatrixXd gauss = rng.gaussian_matrix(points.d(), d_out);
  PointSet out;
  out.data = points.data * gauss / std::sqrt(static_cast<double>(d_out));
  return out;
}

}  // namespace speclust
