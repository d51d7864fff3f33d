#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "speclust/embedding.hpp"
#include "speclust/graph.hpp"
#include "speclust/rng.hpp"
#include "speclust/types.hpp"

namespace speclust {

namespace detail {

constexpr double kPinvRelTol = 1e-10;  // singular values below tol * sigma_max drop to zero

inline Eigen::MatrixXd thin_orthonormalize(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), std::min(m.rows(), m.cols()));
  canonicalize_sign(q);
  return q;
}

// RBF kernel columns K(:, S) with the self-similarity entries zeroed, then the
// usual column-top-k_nn sparsification; k_nn <= 0 keeps the dense columns.
inline Eigen::MatrixXd kernel_columns(const PointSet& points, const std::vector<Index>& sample,
                                      double sigma, Index k_nn) {
  const Index n = points.n();
  const Index m = static_cast<Index>(sample.size());
  Eigen::MatrixXd c(n, m);
  for (Index j = 0; j < m; ++j) {
    const Index col = sample[static_cast<std::size_t>(j)];
    for (Index i = 0; i < n; ++i)
      c(i, j) = (i == col) ? 0.0 : rbf_kernel(points.data, i, col, sigma);
  }
  if (k_nn > 0 && k_nn < n - 1) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index j = 0; j < m; ++j) {
      std::iota(order.begin(), order.end(), Index{0});
      std::nth_element(order.begin(), order.begin() + k_nn, order.end(), [&](Index a, Index b) {
        return c(a, j) > c(b, j) || (c(a, j) == c(b, j) && a < b);
      });
      Eigen::VectorXd kept = Eigen::VectorXd::Zero(n);
      for (Index t = 0; t < k_nn; ++t) kept[order[static_cast<std::size_t>(t)]] = c(order[static_cast<std::size_t>(t)], j);
      c.col(j) = kept;
    }
  }
  return c;
}

}  // namespace detail

// Nystrom low-rank factorization of a PSD matrix from a principal block.
struct NystromSketch {
  std::vector<Index> sample_indices;
  Eigen::MatrixXd b;        // A(S, S)
  Eigen::MatrixXd c_block;  // A(:, S)
  Eigen::VectorXd b_values;      // eigenvalues of B, decreasing magnitude
  Eigen::MatrixXd b_vectors;     // matching eigenvectors
  Index numerical_rank = 0;

  Eigen::MatrixXd pseudo_inverse(Index rank) const {
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(b_values.size());
    const double cutoff = detail::kPinvRelTol * std::abs(b_values[0]);
    for (Index i = 0; i < std::min(rank, b_values.size()); ++i)
      if (std::abs(b_values[i]) > cutoff) inv[i] = 1.0 / b_values[i];
    return b_vectors * inv.asDiagonal() * b_vectors.transpose();
  }

  // A-tilde = C B+ C^T
  Eigen::MatrixXd low_rank() const {
    return c_block * pseudo_inverse(b_values.size()) * c_block.transpose();
  }

  // A-tilde_k = C B_k+ C^T
  Eigen::MatrixXd rank_k(Index k) const { return c_block * pseudo_inverse(k) * c_block.transpose(); }

  // top-k eigenvectors of A-tilde_k: orthonormalized C Q_k Sigma_k^{-1}
  Eigen::MatrixXd top_eigenvectors(Index k) const {
    Eigen::MatrixXd scaled(c_block.rows(), k);
    for (Index i = 0; i < k; ++i)
      scaled.col(i) = c_block * b_vectors.col(i) / b_values[i];
    return detail::thin_orthonormalize(scaled);
  }
};

inline NystromSketch nystrom(const Eigen::MatrixXd& a, const std::vector<Index>& sample, Index k) {
  const Index m = static_cast<Index>(sample.size());
  if (m < k || k < 1) throw std::invalid_argument("nystrom: need |S| >= k >= 1");
  NystromSketch sketch;
  sketch.sample_indices = sample;
  sketch.b.resize(m, m);
  sketch.c_block.resize(a.rows(), m);
  for (Index j = 0; j < m; ++j) {
    sketch.c_block.col(j) = a.col(sample[static_cast<std::size_t>(j)]);
    for (Index i = 0; i < m; ++i)
      sketch.b(i, j) = a(sample[static_cast<std::size_t>(i)], sample[static_cast<std::size_t>(j)]);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sketch.b);
  // sort by decreasing magnitude
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index x, Index y) {
    return std::abs(es.eigenvalues()[x]) > std::abs(es.eigenvalues()[y]);
  });
  sketch.b_values.resize(m);
  sketch.b_vectors.resize(m, m);
  for (Index i = 0; i < m; ++i) {
    sketch.b_values[i] = es.eigenvalues()[order[static_cast<std::size_t>(i)]];
    sketch.b_vectors.col(i) = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
  }
  const double cutoff = detail::kPinvRelTol * std::abs(sketch.b_values[0]);
  sketch.numerical_rank = 0;
  for (Index i = 0; i < m; ++i)
    if (std::abs(sketch.b_values[i]) > cutoff) sketch.numerical_rank++;
  if (sketch.numerical_rank < k)
    throw std::runtime_error("nystrom: block rank " + std::to_string(sketch.numerical_rank) +
                             " below requested k = " + std::to_string(k));
  return sketch;
}

// p_i = ||U_k(i, :)||^2 / k, the optimal i.i.d. sampling distribution.
inline Eigen::VectorXd leverage_scores(const Eigen::MatrixXd& u_k) {
  const Eigen::MatrixXd gram = u_k.transpose() * u_k;
  if ((gram - Eigen::MatrixXd::Identity(u_k.cols(), u_k.cols())).cwiseAbs().maxCoeff() > 1e-6)
    throw std::invalid_argument("leverage_scores: columns must be orthonormal");
  Eigen::VectorXd p(u_k.rows());
  for (Index i = 0; i < u_k.rows(); ++i)
    p[i] = u_k.row(i).squaredNorm() / static_cast<double>(u_k.cols());
  return p;
}

namespace detail {

// shared tail of the Nystrom spectral-clustering pipeline, starting from the
// sparsified blocks B (m x m, symmetric) and C (n x m)
inline Embedding nystrom_sc_tail(const Eigen::MatrixXd& b, const Eigen::MatrixXd& c, Index k,
                                 Warnings* warnings) {
  const Index n = c.rows();
  const Index m = b.rows();
  Eigen::VectorXd d_r = b.rowwise().sum();
  for (Index i = 0; i < m; ++i)
    if (!(d_r[i] > 0.0))
      throw std::runtime_error("nystrom_sc_embedding: sample " + std::to_string(i) +
                               " has nonpositive block degree");
  const Eigen::VectorXd d_r_inv_sqrt = d_r.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd normalized =
      d_r_inv_sqrt.asDiagonal() * b * d_r_inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normalized);

  // top-k eigenpairs
  Eigen::VectorXd sigma_k(k);
  Eigen::MatrixXd q_k(m, k);
  for (Index i = 0; i < k; ++i) {
    sigma_k[i] = es.eigenvalues()[m - 1 - i];
    q_k.col(i) = es.eigenvectors().col(m - 1 - i);
    if (!(sigma_k[i] > detail::kPinvRelTol))
      throw std::runtime_error("nystrom_sc_embedding: block rank below k");
  }

  const Eigen::MatrixXd q_tilde = c * d_r_inv_sqrt.asDiagonal() * q_k * sigma_k.cwiseInverse().asDiagonal();

  // D_l = diag(Q~ Sigma Q~^T 1) without forming the n x n product
  const Eigen::VectorXd t = sigma_k.asDiagonal() * (q_tilde.transpose() * Eigen::VectorXd::Ones(n));
  Eigen::VectorXd d_l = q_tilde * t;
  int clamped = 0;
  for (Index i = 0; i < n; ++i)
    if (!(d_l[i] > 0.0)) {
      d_l[i] = 1e-12;
      ++clamped;
    }
  if (clamped > 0)
    warn(warnings, "nystrom_sc_embedding: clamped " + std::to_string(clamped) +
                       " nonpositive estimated degrees");

  Embedding out;
  out.features = detail::thin_orthonormalize(d_l.cwiseSqrt().cwiseInverse().asDiagonal() * q_tilde);
  out.features.conservativeResize(n, k);
  out.normalization = RowNormalization::none;
  out.source_variant = LaplacianVariant::normalized;
  return out;
}

}  // namespace detail

// Nystrom for spectral clustering from raw points: kernel sub-blocks are
// sparsified in isolation, which is the method's uncontrolled approximation.
inline Embedding nystrom_sc_embedding(const PointSet& points, const std::vector<Index>& sample,
                                      Index k, double sigma, Index k_nn,
                                      Warnings* warnings = nullptr) {
  const Index m = static_cast<Index>(sample.size());
  if (m < k) throw std::invalid_argument("nystrom_sc_embedding: need |S| >= k");
  const Eigen::MatrixXd c = detail::kernel_columns(points, sample, sigma, k_nn);

  // B is sparsified within the m x m block on its own, independent of C
  Eigen::MatrixXd b(m, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < m; ++i)
      b(i, j) = i == j ? 0.0
                       : detail::rbf_kernel(points.data, sample[static_cast<std::size_t>(i)],
                                            sample[static_cast<std::size_t>(j)], sigma);
  if (k_nn > 0 && k_nn < m - 1) {
    Eigen::MatrixXd kept = Eigen::MatrixXd::Zero(m, m);
    std::vector<Index> order(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) {
      std::iota(order.begin(), order.end(), Index{0});
      std::nth_element(order.begin(), order.begin() + k_nn, order.end(), [&](Index x, Index y) {
        return b(x, j) > b(y, j) || (b(x, j) == b(y, j) && x < y);
      });
      for (Index t = 0; t < k_nn; ++t) {
        const Index i = order[static_cast<std::size_t>(t)];
        kept(i, j) = b(i, j);
      }
    }
    b = Eigen::MatrixXd(kept + kept.transpose());
  }
  return detail::nystrom_sc_tail(b, c, k, warnings);
}

// Graph-input variant: adjacency columns play the role of kernel columns.
inline Embedding nystrom_sc_embedding(const SimilarityGraph& graph,
                                      const std::vector<Index>& sample, Index k,
                                      Warnings* warnings = nullptr) {
  const Index m = static_cast<Index>(sample.size());
  if (m < k) throw std::invalid_argument("nystrom_sc_embedding: need |S| >= k");
  const Eigen::MatrixXd dense(graph.adjacency);
  Eigen::MatrixXd c(graph.n(), m);
  for (Index j = 0; j < m; ++j) c.col(j) = dense.col(sample[static_cast<std::size_t>(j)]);
  Eigen::MatrixXd b(m, m);
  for (Index i = 0; i < m; ++i) b.row(i) = c.row(sample[static_cast<std::size_t>(i)]);
  return detail::nystrom_sc_tail(b, c, k, warnings);
}

struct CspecResult {
  Embedding embedding;                    // first min(k, rank) columns of U-tilde
  Eigen::VectorXd scaled_singular_values; // sqrt(n/m) * Sigma_C
};

namespace detail {

inline CspecResult cspec_from_columns(const Eigen::MatrixXd& c, Index k) {
  const Index n = c.rows();
  const Index m = c.cols();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = kPinvRelTol * sv[0];
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;
  const Index keep = std::min(k, rank);

  Eigen::MatrixXd u_tilde(n, keep);
  for (Index i = 0; i < keep; ++i) u_tilde.col(i) = c * svd.matrixV().col(i) / sv[i];
  canonicalize_sign(u_tilde);

  CspecResult out;
  out.embedding.features = std::move(u_tilde);
  out.embedding.normalization = RowNormalization::none;
  out.embedding.source_variant = LaplacianVariant::normalized;
  out.scaled_singular_values =
      std::sqrt(static_cast<double>(n) / static_cast<double>(m)) * sv.head(keep);
  return out;
}

}  // namespace detail

// Column-sampling spectral clustering: SVD of the sampled kernel columns.
inline CspecResult cspec_embedding(const PointSet& points, const std::vector<Index>& sample,
                                   Index k, double sigma, Index k_nn) {
  if (static_cast<Index>(sample.size()) < k)
    throw std::invalid_argument("cspec_embedding: need |S| >= k");
  return detail::cspec_from_columns(detail::kernel_columns(points, sample, sigma, k_nn), k);
}

inline CspecResult cspec_embedding(const SimilarityGraph& graph, const std::vector<Index>& sample,
                                   Index k) {
  if (static_cast<Index>(sample.size()) < k)
    throw std::invalid_argument("cspec_embedding: need |S| >= k");
  const Eigen::MatrixXd dense(graph.adjacency);
  Eigen::MatrixXd c(graph.n(), static_cast<Index>(sample.size()));
  for (Index j = 0; j < c.cols(); ++j) c.col(j) = dense.col(sample[static_cast<std::size_t>(j)]);
  return detail::cspec_from_columns(c, k);
}

// Random Fourier features for the RBF kernel exp(-||x - y||^2 / sigma^2).
struct RFFMatrix {
  Eigen::MatrixXd frequencies;  // m x d, i.i.d. N(0, 2/sigma^2) entries
  Eigen::MatrixXd features;     // 2m x n, columns psi_i with unit norm
};

inline RFFMatrix rff_features(const PointSet& points, Index m, double sigma, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("rff_features: need m >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("rff_features: sigma must be positive");
  Rng rng(seed);
  RFFMatrix out;
  out.frequencies = rng.gaussian_matrix(m, points.d(), std::sqrt(2.0) / sigma);
  const Eigen::MatrixXd phases = out.frequencies * points.data.transpose();  // m x n
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  out.features.resize(2 * m, points.n());
  out.features.topRows(m) = scale * phases.array().cos();
  out.features.bottomRows(m) = scale * phases.array().sin();
  return out;
}

// Degree-normalized SVD of the feature matrix: right singular vectors
// approximate the normalized-Laplacian embedding.
inline Embedding rff_sc_embedding(const RFFMatrix& rff, Index k, Warnings* warnings = nullptr) {
  const Index n = rff.features.cols();
  if (2 * rff.frequencies.rows() < k)
    throw std::invalid_argument("rff_sc_embedding: need 2m >= k");
  const Eigen::VectorXd psi_bar = rff.features.rowwise().sum();
  Eigen::VectorXd degrees = rff.features.transpose() * psi_bar;
  int clamped = 0;
  for (Index i = 0; i < n; ++i)
    if (!(degrees[i] > 0.0)) {
      degrees[i] = 1e-12;
      ++clamped;
    }
  if (clamped > 0)
    warn(warnings, "rff_sc_embedding: clamped " + std::to_string(clamped) +
                       " nonpositive estimated degrees");

  const Eigen::MatrixXd normalized =
      rff.features * degrees.cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(normalized, Eigen::ComputeThinV);
  Embedding out;
  out.features = svd.matrixV().leftCols(std::min(k, svd.matrixV().cols()));
  canonicalize_sign(out.features);
  out.normalization = RowNormalization::none;
  out.source_variant = LaplacianVariant::normalized;
  return out;
}

}  // namespace speclust
