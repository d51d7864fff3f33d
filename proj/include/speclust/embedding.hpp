#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "speclust/eigensolver.hpp"
#include "speclust/graph.hpp"
#include "speclust/types.hpp"

namespace speclust {

struct SpectralDecomposition {
  Embedding embedding;          // features after the variant's row-normalization rule
  Eigen::MatrixXd eigenvectors; // raw U_k, orthonormal columns
  Eigen::VectorXd eigenvalues;  // ascending
  double worst_residual = 0.0;
  int restarts = 0;
};

// Reproducible sign: largest-magnitude entry positive, ties to lowest index.
inline void canonicalize_sign(Eigen::MatrixXd& vectors) {
  for (Index c = 0; c < vectors.cols(); ++c) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < vectors.rows(); ++i) {
      const double mag = std::abs(vectors(i, c));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (vectors(arg, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

struct SpectralEmbeddingOptions {
  double tol = 1e-8;
  int max_restarts = 200;
  std::uint64_t seed = 0x5eedULL;
};

// k smallest eigenpairs of the chosen Laplacian; rows unit-normalized for the
// normalized variant, untouched otherwise.
inline SpectralDecomposition spectral_embedding(const LaplacianMatrix& lap, Index k,
                                                const SpectralEmbeddingOptions& opts = {}) {
  if (k >= lap.n()) throw std::invalid_argument("spectral_embedding: need k < n");
  LanczosOptions lopts;
  lopts.tol = opts.tol;
  lopts.max_restarts = opts.max_restarts;
  lopts.seed = opts.seed;

  EigenPairs pairs = lanczos_smallest(laplacian_operator(lap), lap.n(), k,
                                      lap.lambda_max_bound(), lopts);

  SpectralDecomposition out;
  out.eigenvalues = pairs.values;
  out.worst_residual = pairs.worst_residual;
  out.restarts = pairs.restarts;
  if (lap.variant == LaplacianVariant::random_walk) {
    // eigenvectors of L_rw from the symmetrized problem
    Eigen::VectorXd dinv_sqrt = lap.degrees.cwiseSqrt().cwiseInverse();
    out.eigenvectors = dinv_sqrt.asDiagonal() * pairs.vectors;
  } else {
    out.eigenvectors = pairs.vectors;
  }
  canonicalize_sign(out.eigenvectors);

  out.embedding.features = out.eigenvectors;
  out.embedding.source_variant = lap.variant;
  if (lap.variant == LaplacianVariant::normalized) {
    unit_normalize_rows(out.embedding.features);
    out.embedding.normalization = RowNormalization::unit_row;
  }
  return out;
}

}  // namespace speclust
