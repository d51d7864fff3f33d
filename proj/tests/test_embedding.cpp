#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "speclust/embedding.hpp"
#include "speclust/graph.hpp"

using namespace speclust;
using Catch::Approx;

namespace {

SimilarityGraph path_graph(Index n) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) w(i, i + 1) = w(i + 1, i) = 1.0;
  return SimilarityGraph::from_dense(w);
}

SimilarityGraph disconnected_cliques(Index blocks, Index size) {
  const Index n = blocks * size;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Index b = 0; b < blocks; ++b)
    for (Index i = 0; i < size; ++i)
      for (Index j = 0; j < size; ++j)
        if (i != j) w(b * size + i, b * size + j) = 1.0;
  return SimilarityGraph::from_dense(w);
}

}  // namespace

TEST_CASE("path graph eigenvalues match the closed form", "[embedding]") {
  const Index n = 6;
  const auto lap = laplacian(path_graph(n), LaplacianVariant::combinatorial);
  const auto dec = spectral_embedding(lap, 5);
  for (Index l = 0; l < 5; ++l) {
    const double expected = 2.0 - 2.0 * std::cos(M_PI * static_cast<double>(l) / 6.0);
    REQUIRE(dec.eigenvalues[l] == Approx(expected).margin(1e-8));
  }
}

TEST_CASE("k disconnected components give k zero eigenvalues spanned by indicators",
          "[embedding]") {
  const auto graph = disconnected_cliques(3, 5);
  const auto lap = laplacian(graph, LaplacianVariant::combinatorial);
  const auto dec = spectral_embedding(lap, 3);
  for (Index l = 0; l < 3; ++l) REQUIRE(std::abs(dec.eigenvalues[l]) <= 1e-9);

  Eigen::MatrixXd indicators = Eigen::MatrixXd::Zero(15, 3);
  for (Index b = 0; b < 3; ++b)
    for (Index i = 0; i < 5; ++i) indicators(b * 5 + i, b) = 1.0;
  REQUIRE(oracle::max_principal_angle(dec.eigenvectors, indicators) <= 1e-6);
}

TEST_CASE("lanczos pairs match the dense oracle on a random graph", "[embedding]") {
  Rng rng(77);
  const auto graph = oracle::random_connected_graph(30, 0.25, rng);
  const auto lap = laplacian(graph, LaplacianVariant::combinatorial);
  const auto dec = spectral_embedding(lap, 4);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense{Eigen::MatrixXd(lap.matrix)};
  for (Index l = 0; l < 4; ++l) {
    REQUIRE(dec.eigenvalues[l] == Approx(dense.eigenvalues()[l]).margin(1e-6));
    const double align = std::abs(dec.eigenvectors.col(l).dot(dense.eigenvectors().col(l)));
    REQUIRE(align == Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("embedding columns are orthonormal and the residual contract holds", "[embedding]") {
  Rng rng(78);
  const auto graph = oracle::random_connected_graph(40, 0.2, rng);
  const auto lap = laplacian(graph, LaplacianVariant::combinatorial);
  SpectralEmbeddingOptions opts;
  opts.tol = 1e-8;
  const auto dec = spectral_embedding(lap, 5, opts);

  const Eigen::MatrixXd gram = dec.eigenvectors.transpose() * dec.eigenvectors;
  REQUIRE((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-8);
  REQUIRE(dec.worst_residual <= 1e-8 * lap.lambda_max_bound());
  for (Index l = 0; l < 5; ++l) {
    const Eigen::VectorXd u = dec.eigenvectors.col(l);
    const double residual = (lap.matrix * u - dec.eigenvalues[l] * u).norm();
    REQUIRE(residual <= 1e-8 * lap.lambda_max_bound());
  }
}

TEST_CASE("sign convention makes embeddings reproducible", "[embedding]") {
  Rng rng(79);
  const auto graph = oracle::random_connected_graph(25, 0.3, rng);
  const auto lap = laplacian(graph, LaplacianVariant::combinatorial);
  const auto a = spectral_embedding(lap, 3);
  const auto b = spectral_embedding(lap, 3);
  REQUIRE((a.eigenvectors - b.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
  for (Index c = 0; c < 3; ++c) {
    Index arg = 0;
    a.eigenvectors.col(c).cwiseAbs().maxCoeff(&arg);
    REQUIRE(a.eigenvectors(arg, c) > 0.0);
  }
}

TEST_CASE("normalized variant unit-normalizes embedding rows", "[embedding]") {
  Rng rng(80);
  const auto graph = oracle::random_connected_graph(30, 0.25, rng);
  const auto lap = laplacian(graph, LaplacianVariant::normalized);
  const auto dec = spectral_embedding(lap, 3);
  REQUIRE(dec.embedding.normalization == RowNormalization::unit_row);
  for (Index i = 0; i < 30; ++i) {
    const double norm = dec.embedding.features.row(i).norm();
    if (norm > 0.0) REQUIRE(norm == Approx(1.0).margin(1e-10));
  }
  // raw eigenvectors stay orthonormal
  const Eigen::MatrixXd gram = dec.eigenvectors.transpose() * dec.eigenvectors;
  REQUIRE((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("random-walk embedding solves the generalized problem", "[embedding]") {
  Rng rng(81);
  const auto graph = oracle::random_connected_graph(24, 0.3, rng);
  const auto lap = laplacian(graph, LaplacianVariant::random_walk);
  const auto dec = spectral_embedding(lap, 3);
  REQUIRE(dec.embedding.normalization == RowNormalization::none);
  for (Index l = 0; l < 3; ++l) {
    const Eigen::VectorXd u = dec.eigenvectors.col(l);
    const double residual = (lap.matrix * u - dec.eigenvalues[l] * u).norm() / u.norm();
    REQUIRE(residual <= 1e-6);
  }
}

TEST_CASE("non-convergence reports the best residual", "[embedding]") {
  Rng rng(82);
  const auto graph = oracle::random_connected_graph(40, 0.2, rng);
  const auto lap = laplacian(graph, LaplacianVariant::combinatorial);
  SpectralEmbeddingOptions opts;
  opts.tol = 1e-15;  // unattainably tight
  opts.max_restarts = 0;
  try {
    spectral_embedding(lap, 3, opts);
    FAIL("expected EigensolverError");
  } catch (const EigensolverError& err) {
    REQUIRE(std::isfinite(err.best_residual()));
  }
}

TEST_CASE("dense spectrum path is gated", "[embedding]") {
  LaplacianMatrix lap;
  lap.variant = LaplacianVariant::combinatorial;
  lap.matrix = SpMat(3000, 3000);
  lap.matrix.setIdentity();
  lap.degrees = Eigen::VectorXd::Ones(3000);
  REQUIRE_THROWS(dense_spectrum(lap));
}
