#pragma once

#include <cstdint>

#include "speclust/embedding.hpp"
#include "speclust/graph.hpp"
#include "speclust/kmeans.hpp"
#include "speclust/types.hpp"

namespace speclust {

// Knobs of the prototypical pipeline: graph construction, Laplacian variant,
// and the k-means policy applied to the embedding rows.
struct ExactPipelineOptions {
  double sigma = 0.0;  // 0: median-pairwise-distance heuristic
  Index k_nn = 5;
  LaplacianVariant variant = LaplacianVariant::combinatorial;
  int kmeans_restarts = 10;
  SpectralEmbeddingOptions eig{};
};

struct PipelineResult {
  Clustering clustering;
  Embedding embedding;
  Eigen::MatrixXd eigenvectors;
  Eigen::VectorXd eigenvalues;
};

inline PipelineResult exact_spectral_clustering(const SimilarityGraph& graph, Index k,
                                                std::uint64_t seed,
                                                const ExactPipelineOptions& opts = {}) {
  const auto lap = laplacian(graph, opts.variant);
  auto dec = spectral_embedding(lap, k, opts.eig);
  PipelineResult out;
  out.clustering = kmeanspp_run(dec.embedding.features, k, seed, opts.kmeans_restarts);
  out.embedding = std::move(dec.embedding);
  out.eigenvectors = std::move(dec.eigenvectors);
  out.eigenvalues = std::move(dec.eigenvalues);
  return out;
}

inline PipelineResult exact_spectral_clustering(const PointSet& points, Index k,
                                                std::uint64_t seed,
                                                const ExactPipelineOptions& opts = {}) {
  const double sigma = opts.sigma > 0.0 ? opts.sigma : sigma_heuristic(points);
  const auto graph = build_knn_graph(points, sigma, opts.k_nn);
  return exact_spectral_clustering(graph, k, seed, opts);
}

}  // namespace speclust
