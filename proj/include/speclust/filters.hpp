#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "speclust/eigensolver.hpp"
#include "speclust/graph.hpp"
#include "speclust/rng.hpp"
#include "speclust/types.hpp"

namespace speclust {

// Scalar spectral response applied through a degree-c Chebyshev polynomial.
struct SpectralFilter {
  std::function<double(double)> response;
  int order = 32;
  double lambda_star = 0.0;

  // Ideal low-pass smoothed by a C-infinity transition band of width
  // 0.1 * lambda_star, which tames the Gibbs oscillations of the fit.
  static SpectralFilter ideal_low_pass(double lambda_star, int order) {
    SpectralFilter f;
    f.order = order;
    f.lambda_star = lambda_star;
    const double half_band = 0.05 * lambda_star;
    f.response = [lambda_star, half_band](double lambda) {
      const auto bump = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
      if (lambda <= lambda_star - half_band) return 1.0;
      if (lambda >= lambda_star + half_band) return 0.0;
      const double t = (lambda - (lambda_star - half_band)) / (2.0 * half_band);
      return bump(1.0 - t) / (bump(1.0 - t) + bump(t));
    };
    return f;
  }

  static SpectralFilter all_pass(double lambda_max, int order = 8) {
    SpectralFilter f;
    f.order = order;
    f.lambda_star = 0.5 * lambda_max;
    f.response = [](double) { return 1.0; };
    return f;
  }
};

namespace detail {

// Chebyshev series coefficients of h on [0, lambda_max]; p(x) = c0/2 + sum c_j T_j.
inline std::vector<double> chebyshev_coefficients(const std::function<double(double)>& h,
                                                  double lambda_max, int order) {
  const int quad = std::max(128, 4 * (order + 1));
  std::vector<double> coeffs(static_cast<std::size_t>(order) + 1, 0.0);
  for (int j = 0; j <= order; ++j) {
    double acc = 0.0;
    for (int i = 0; i < quad; ++i) {
      const double theta = M_PI * (i + 0.5) / quad;
      const double x = 0.5 * lambda_max * (std::cos(theta) + 1.0);
      acc += h(x) * std::cos(j * theta);
    }
    coeffs[static_cast<std::size_t>(j)] = 2.0 * acc / quad;
  }
  return coeffs;
}

}  // namespace detail

// p_c(L) * vectors via the three-term recurrence; cost O(m * c * e).
inline Eigen::MatrixXd chebyshev_apply(const LaplacianMatrix& lap, const SpectralFilter& filter,
                                       const Eigen::MatrixXd& vectors) {
  if (lap.variant == LaplacianVariant::random_walk)
    throw std::invalid_argument("chebyshev_apply: needs a symmetric Laplacian variant");
  if (filter.order < 1) throw std::invalid_argument("chebyshev_apply: order must be >= 1");
  const double lambda_max = lap.lambda_max_bound();
  if (!(filter.lambda_star > 0.0) || !(filter.lambda_star < lambda_max))
    throw std::invalid_argument("chebyshev_apply: lambda_star outside (0, lambda_max)");
  if (vectors.rows() != lap.n()) throw std::invalid_argument("chebyshev_apply: size mismatch");

  const auto coeffs = detail::chebyshev_coefficients(filter.response, lambda_max, filter.order);
  const double scale = 2.0 / lambda_max;
  const auto apply_t = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return scale * (lap.matrix * x) - x;
  };

  Eigen::MatrixXd prev = vectors;
  Eigen::MatrixXd curr = apply_t(vectors);
  Eigen::MatrixXd acc = 0.5 * coeffs[0] * prev + coeffs[1] * curr;
  for (int j = 2; j <= filter.order; ++j) {
    Eigen::MatrixXd next = 2.0 * apply_t(curr) - prev;
    acc += coeffs[static_cast<std::size_t>(j)] * next;
    prev = std::move(curr);
    curr = std::move(next);
  }
  return acc;
}

struct LambdaStarOptions {
  Index m_probe = 0;  // 0: ceil(4 k^2 ln n)
  int order = 64;
  int budget = 60;
  std::uint64_t seed = 0x1a3bULL;
};

struct LambdaStarResult {
  double lambda_star = 0.0;
  Index eigencount = 0;
  int steps = 0;
};

// Eigencount-based dichotomy for a cutoff inside [lambda_k, lambda_{k+1}).
// The estimator is || p_c(L) R ||_F^2 rounded to the nearest integer, with R
// Gaussian of per-entry variance 1/m_probe.
inline LambdaStarResult estimate_lambda_star(const LaplacianMatrix& lap, Index k,
                                             const LambdaStarOptions& opts = {}) {
  const Index n = lap.n();
  if (k < 1 || k >= n) throw std::invalid_argument("estimate_lambda_star: need 1 <= k < n");
  const Index m_probe =
      opts.m_probe > 0
          ? opts.m_probe
          : static_cast<Index>(std::ceil(4.0 * static_cast<double>(k * k) * std::log(n)));
  Rng rng(opts.seed);
  const Eigen::MatrixXd probes =
      rng.gaussian_matrix(n, m_probe, 1.0 / std::sqrt(static_cast<double>(m_probe)));

  const double lambda_max = lap.lambda_max_bound();
  const auto eigencount = [&](double lambda) -> Index {
    const auto filter = SpectralFilter::ideal_low_pass(lambda, opts.order);
    const double j_hat = chebyshev_apply(lap, filter, probes).squaredNorm();
    return static_cast<Index>(std::llround(j_hat));
  };

  double lo = 0.0, hi = lambda_max;
  for (int step = 1; step <= opts.budget; ++step) {
    const double mid = 0.5 * (lo + hi);
    const Index count = eigencount(mid);
    if (count == k) {
      // accept only when the count is stable under cutoff shifts of the
      // transition-band width: a band straddling a multiple eigenvalue can
      // produce a fractional mass that happens to round to k
      const Index below = eigencount(0.95 * mid);
      const Index above = eigencount(1.05 * mid);
      if (below == k && above == k) return {mid, count, step};
      if (above > k)
        hi = 1.05 * mid;
      else if (below < k)
        lo = 0.95 * mid;
      else
        hi = mid;
    } else if (count < k) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw std::runtime_error(
      "estimate_lambda_star: dichotomy budget exhausted (gap too small); "
      "use the exact embedding path instead");
}

enum class ProjectionEntries { gaussian, sparse_three_point };

// Random matrix with per-entry variance 1/m: Gaussian, or the sparse
// {-sqrt(3), 0, +sqrt(3)}/sqrt(m) scheme with probabilities {1/6, 2/3, 1/6}.
inline Eigen::MatrixXd projection_matrix(Index n, Index m, ProjectionEntries entries,
                                         std::uint64_t seed) {
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Eigen::MatrixXd r(n, m);
  if (entries == ProjectionEntries::gaussian) {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) r(i, j) = scale * rng.normal();
  } else {
    const double root3 = std::sqrt(3.0);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) {
        const double u = rng.uniform();
        r(i, j) = u < 1.0 / 6.0 ? -root3 * scale : (u < 5.0 / 6.0 ? 0.0 : root3 * scale);
      }
  }
  return r;
}

struct RandomProjectionOptions {
  int order = 32;
  ProjectionEntries entries = ProjectionEntries::gaussian;
};

// Filtered random features p_c(L) R approximating the span of U_k.
inline Embedding random_projection_embedding(const LaplacianMatrix& lap, Index k, Index m,
                                             double lambda_star, std::uint64_t seed,
                                             const RandomProjectionOptions& opts = {}) {
  if (m < k) throw std::invalid_argument("random_projection_embedding: need m >= k");
  const Eigen::MatrixXd r = projection_matrix(lap.n(), m, opts.entries, seed);
  const auto filter = SpectralFilter::ideal_low_pass(lambda_star, opts.order);
  Embedding out;
  out.features = chebyshev_apply(lap, filter, r);
  out.source_variant = lap.variant;
  out.normalization = RowNormalization::none;
  return out;
}

}  // namespace speclust
