#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace speclust {

using Index = Eigen::Index;

// n points in dimension d, one per row.
struct PointSet {
  Eigen::MatrixXd data;

  PointSet() = default;
  explicit PointSet(Eigen::MatrixXd m) : data(std::move(m)) { validate(); }

  Index n() const { return data.rows(); }
  Index d() const { return data.cols(); }

  void validate() const {
    if (data.rows() < 1 || data.cols() < 1)
      throw std::invalid_argument("PointSet: need n >= 1 and d >= 1");
    if (!data.allFinite()) throw std::invalid_argument("PointSet: NaN/Inf entry");
  }
};

// Cluster labels in {1..k}.
struct Partition {
  std::vector<int> labels;
  int k = 0;

  Partition() = default;
  Partition(std::vector<int> l, int k_) : labels(std::move(l)), k(k_) { validate(); }

  Index n() const { return static_cast<Index>(labels.size()); }

  void validate() const {
    if (k < 1) throw std::invalid_argument("Partition: k must be positive");
    for (int lab : labels)
      if (lab < 1 || lab > k) throw std::invalid_argument("Partition: label out of range");
  }

  std::vector<Index> cluster_sizes() const {
    std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
    for (int lab : labels) sizes[static_cast<std::size_t>(lab - 1)]++;
    return sizes;
  }

  bool has_empty_cluster() const {
    for (Index s : cluster_sizes())
      if (s == 0) return true;
    return false;
  }
};

struct CentroidSet {
  Eigen::MatrixXd centroids;  // k x d'

  Index k() const { return centroids.rows(); }
  Index dim() const { return centroids.cols(); }
};

struct Clustering {
  Partition labels;
  CentroidSet centroids;
  double cost = 0.0;
};

enum class RowNormalization { none, unit_row };
enum class LaplacianVariant { combinatorial, normalized, random_walk };

inline std::string to_string(LaplacianVariant v) {
  switch (v) {
    case LaplacianVariant::combinatorial: return "combinatorial";
    case LaplacianVariant::normalized: return "normalized";
    case LaplacianVariant::random_walk: return "random_walk";
  }
  return "?";
}

// Spectral features, one row per node.
struct Embedding {
  Eigen::MatrixXd features;  // n x k
  RowNormalization normalization = RowNormalization::none;
  LaplacianVariant source_variant = LaplacianVariant::combinatorial;

  Index n() const { return features.rows(); }
  Index k() const { return features.cols(); }
};

inline void unit_normalize_rows(Eigen::MatrixXd& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    const double norm = m.row(i).norm();
    if (norm > 0.0) m.row(i) /= norm;
  }
}

// Ordered sample with positive weights (coresets, sampling plans, Nystrom columns).
struct WeightedSample {
  std::vector<Index> indices;
  Eigen::VectorXd weights;

  Index size() const { return static_cast<Index>(indices.size()); }

  void validate() const {
    if (static_cast<Index>(indices.size()) != weights.size())
      throw std::invalid_argument("WeightedSample: size mismatch");
    for (Index i = 0; i < weights.size(); ++i)
      if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
        throw std::invalid_argument("WeightedSample: weights must be finite and positive");
  }
};

using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, const std::string& message) {
  if (sink != nullptr) sink->push_back(message);
}

}  // namespace speclust
