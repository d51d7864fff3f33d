#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "speclust/graph.hpp"
#include "speclust/rng.hpp"
#include "speclust/types.hpp"

namespace speclust {

class EigensolverError : public std::runtime_error {
public:
  EigensolverError(const std::string& message, double best_residual)
      : std::runtime_error(message), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

private:
  double best_residual_ = 0.0;
};

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // n x k, orthonormal columns
  double worst_residual = 0.0;
  int restarts = 0;
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LanczosOptions {
  double tol = 1e-8;
  int max_restarts = 200;
  Index basis_size = 0;  // 0: automatic
  std::uint64_t seed = 0x5eedULL;
};

// Computes the k smallest eigenpairs of a symmetric PSD operator with spectrum
// in [0, norm_bound]. Lanczos on the reversed operator norm_bound*I - L with
// full reorthogonalization; converged pairs are locked and deflated, restarts
// use the best unconverged Ritz vector.
inline EigenPairs lanczos_smallest(const LinearOperator& apply, Index n, Index k,
                                   double norm_bound, const LanczosOptions& opts = {}) {
  if (k < 1 || k >= n) throw std::invalid_argument("lanczos_smallest: need 1 <= k < n");
  if (!(norm_bound > 0.0)) throw std::invalid_argument("lanczos_smallest: bad norm bound");

  const double lock_tol = 0.5 * opts.tol * norm_bound;
  const double final_tol = opts.tol * norm_bound;
  Rng rng(opts.seed);

  const auto apply_reversed = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return norm_bound * v - apply(v);
  };

  Eigen::MatrixXd locked(n, 0);
  std::vector<double> locked_theta;  // eigenvalues of the reversed operator
  double best_residual = std::numeric_limits<double>::infinity();
  Eigen::VectorXd next_start;
  int restarts = 0;

  const auto orthogonalize = [&](Eigen::VectorXd& w, const Eigen::MatrixXd& basis, Index cols) {
    if (locked.cols() > 0) w -= locked * (locked.transpose() * w);
    if (cols > 0) w -= basis.leftCols(cols) * (basis.leftCols(cols).transpose() * w);
  };

  while (static_cast<Index>(locked_theta.size()) < k) {
    if (restarts > opts.max_restarts)
      throw EigensolverError("lanczos_smallest: no convergence after " +
                                 std::to_string(opts.max_restarts) + " restarts",
                             best_residual);
    ++restarts;

    const Index room = n - locked.cols();
    Index m = opts.basis_size > 0 ? opts.basis_size : std::max<Index>(2 * k + 16, 40);
    m = std::min(m, room);
    if (m < 1) break;

    Eigen::VectorXd v = next_start.size() == n ? next_start : rng.gaussian_matrix(n, 1).col(0);
    next_start.resize(0);
    orthogonalize(v, Eigen::MatrixXd(), 0);
    if (v.norm() < 1e-12) {
      v = rng.gaussian_matrix(n, 1).col(0);
      orthogonalize(v, Eigen::MatrixXd(), 0);
    }
    v.normalize();

    Eigen::MatrixXd basis(n, m);
    Eigen::VectorXd alpha(m), beta(m);
    basis.col(0) = v;
    Index built = 0;
    for (Index j = 0; j < m; ++j) {
      Eigen::VectorXd w = apply_reversed(basis.col(j));
      alpha[j] = basis.col(j).dot(w);
      built = j + 1;
      if (j + 1 == m) break;
      // two Gram-Schmidt passes against locked vectors and the whole basis
      orthogonalize(w, basis, j + 1);
      orthogonalize(w, basis, j + 1);
      beta[j] = w.norm();
      if (beta[j] < 1e-13 * norm_bound) break;  // invariant subspace found
      basis.col(j + 1) = w / beta[j];
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(built, built);
    for (Index j = 0; j < built; ++j) {
      t(j, j) = alpha[j];
      if (j + 1 < built) t(j, j + 1) = t(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);

    // Only the top Ritz pair of the deflated operator may be locked: a single
    // Krylov sequence carries one copy of a multiple eigenvalue, so deeper
    // converged pairs are not necessarily the next ones in order.
    const double theta = es.eigenvalues()[built - 1];
    Eigen::VectorXd y = basis.leftCols(built) * es.eigenvectors().col(built - 1);
    y.normalize();
    const double residual = (apply_reversed(y) - theta * y).norm();
    best_residual = std::min(best_residual, residual);
    if (residual <= lock_tol) {
      locked.conservativeResize(n, locked.cols() + 1);
      locked.col(locked.cols() - 1) = y;
      locked_theta.push_back(theta);
      // restart from a fresh random vector: warm-starting from the next Ritz
      // vector would hide remaining copies of a multiple eigenvalue
    } else {
      next_start = y;
    }
  }

  if (static_cast<Index>(locked_theta.size()) < k)
    throw EigensolverError("lanczos_smallest: exhausted space before locking k pairs",
                           best_residual);

  // order by eigenvalue of L ascending (largest theta first)
  std::vector<Index> order(locked_theta.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return locked_theta[static_cast<std::size_t>(a)] >
                                           locked_theta[static_cast<std::size_t>(b)]; });

  EigenPairs out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  out.restarts = restarts;
  for (Index c = 0; c < k; ++c) {
    const Index src = order[static_cast<std::size_t>(c)];
    Eigen::VectorXd v = locked.col(src);
    // light Gram-Schmidt polish against the already accepted columns
    if (c > 0) v -= out.vectors.leftCols(c) * (out.vectors.leftCols(c).transpose() * v);
    v.normalize();
    const Eigen::VectorXd lv = apply(v);
    const double lambda = v.dot(lv);
    out.values[c] = lambda;
    out.vectors.col(c) = v;
    out.worst_residual = std::max(out.worst_residual, (lv - lambda * v).norm());
  }
  if (out.worst_residual > final_tol)
    throw EigensolverError("lanczos_smallest: residual " + std::to_string(out.worst_residual) +
                               " above tolerance",
                           out.worst_residual);
  return out;
}

inline LinearOperator sparse_operator(const SpMat& m) {
  return [&m](const Eigen::VectorXd& v) -> Eigen::VectorXd { return m * v; };
}

// Symmetric operator whose spectrum matches the requested Laplacian variant.
// The random-walk variant is handled through its similarity transform
// D^{1/2} L_rw D^{-1/2} = L_n; eigenvectors are mapped back by the caller.
inline LinearOperator laplacian_operator(const LaplacianMatrix& lap) {
  if (lap.variant != LaplacianVariant::random_walk) return sparse_operator(lap.matrix);
  const SpMat* m = &lap.matrix;
  Eigen::VectorXd dsqrt = lap.degrees.cwiseSqrt();
  Eigen::VectorXd dinv_sqrt = dsqrt.cwiseInverse();
  return [m, dsqrt, dinv_sqrt](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return dsqrt.asDiagonal() * (*m * (dinv_sqrt.asDiagonal() * v));
  };
}

constexpr Index kDenseSpectrumGate = 2048;

// Full eigendecomposition through the dense path; gated to small n and used by
// oracles and the graph Fourier transform.
inline EigenPairs dense_spectrum(const LaplacianMatrix& lap) {
  const Index n = lap.n();
  if (n > kDenseSpectrumGate)
    throw std::invalid_argument("dense_spectrum: gated to n <= " +
                                std::to_string(kDenseSpectrumGate));
  Eigen::MatrixXd dense;
  if (lap.variant == LaplacianVariant::random_walk) {
    // symmetrize through the similarity transform, then map back below
    Eigen::VectorXd dsqrt = lap.degrees.cwiseSqrt();
    Eigen::VectorXd dinv_sqrt = dsqrt.cwiseInverse();
    dense = dsqrt.asDiagonal() * Eigen::MatrixXd(lap.matrix) * dinv_sqrt.asDiagonal();
    dense = 0.5 * (dense + dense.transpose());
  } else {
    dense = Eigen::MatrixXd(lap.matrix);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  EigenPairs out;
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  if (lap.variant == LaplacianVariant::random_walk) {
    Eigen::VectorXd dinv_sqrt = lap.degrees.cwiseSqrt().cwiseInverse();
    out.vectors = dinv_sqrt.asDiagonal() * out.vectors;
  }
  return out;
}

}  // namespace speclust
