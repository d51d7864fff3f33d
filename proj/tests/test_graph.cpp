#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "speclust/datasets.hpp"
#include "speclust/eigensolver.hpp"
#include "speclust/graph.hpp"

using namespace speclust;
using Catch::Approx;

namespace {

PointSet gaussian_blobs(Index n, Index d, int blobs, double spread, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd data(n, d);
  for (Index i = 0; i < n; ++i) {
    const int b = static_cast<int>(i) % blobs;
    for (Index j = 0; j < d; ++j) data(i, j) = 5.0 * b + spread * rng.normal();
  }
  return PointSet(std::move(data));
}

}  // namespace

TEST_CASE("knn graph on two moons has the contracted sparsity", "[graph]") {
  const auto moons = generate_two_moons(500, 0.05, 7);
  const auto graph = build_knn_graph(moons.points, 0.5, 5);
  REQUIRE(graph.n() == 500);
  Index total_nnz = 0;
  for (Index i = 0; i < graph.n(); ++i) {
    Index nnz = 0;
    for (SpMat::InnerIterator it(graph.adjacency, i); it; ++it) ++nnz;
    REQUIRE(nnz >= 5);  // every node keeps at least its own k_nn column picks
    REQUIRE(graph.degrees[i] > 0.0);
    total_nnz += nnz;
  }
  // row support beyond 2*k_nn is possible for hub points, but only on average
  // can a row carry its own picks plus the transposed ones
  REQUIRE(total_nnz <= 2 * 5 * graph.n());
}

TEST_CASE("knn graph of two identical points doubles the unit kernel", "[graph]") {
  Eigen::MatrixXd data(2, 1);
  data << 0.0, 0.0;
  const auto graph = build_knn_graph(PointSet(data), 1.7, 1);
  const Eigen::MatrixXd w(graph.adjacency);
  Eigen::MatrixXd expected(2, 2);
  expected << 0.0, 2.0, 2.0, 0.0;
  REQUIRE((w - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("knn graph matches the dense kernel oracle", "[graph]") {
  const auto points = gaussian_blobs(8, 3, 2, 0.3, 11);
  const double sigma = 1.3;
  const auto graph = build_knn_graph(points, sigma, 3);
  const Eigen::MatrixXd expected = oracle::knn_graph_dense(points.data, sigma, 3);
  REQUIRE((Eigen::MatrixXd(graph.adjacency) - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("knn graph symmetry is bitwise and the diagonal is zero", "[graph]") {
  const auto points = gaussian_blobs(60, 2, 3, 0.4, 3);
  const auto graph = build_knn_graph(points, 0.8, 4);
  const Eigen::MatrixXd w(graph.adjacency);
  REQUIRE((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(w.diagonal().cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd row_sums = w.rowwise().sum();
  for (Index i = 0; i < graph.n(); ++i)
    REQUIRE(graph.degrees[i] == Approx(row_sums[i]).epsilon(1e-12));
}

TEST_CASE("degree-0 node after sparsification is a hard error naming the node", "[graph]") {
  Eigen::MatrixXd data(3, 1);
  data << 0.0, 1.0, 1e6;  // the far point's kernel column underflows to zero
  REQUIRE_THROWS_WITH(build_knn_graph(PointSet(data), 1.0, 1),
                      Catch::Matchers::ContainsSubstring("isolated node 2"));
}

TEST_CASE("complete graph K4 combinatorial spectrum is {0,4,4,4}", "[graph]") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(4, 4);
  w.diagonal().setZero();
  const auto lap = laplacian(SimilarityGraph::from_dense(w), LaplacianVariant::combinatorial);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(lap.matrix)};
  REQUIRE(es.eigenvalues()[0] == Approx(0.0).margin(1e-10));
  for (int i = 1; i < 4; ++i) REQUIRE(es.eigenvalues()[i] == Approx(4.0).margin(1e-10));
}

TEST_CASE("combinatorial Laplacian of a connected graph has a constant first eigenvector",
          "[graph]") {
  Rng rng(21);
  const auto graph = oracle::random_connected_graph(12, 0.3, rng);
  const auto lap = laplacian(graph, LaplacianVariant::combinatorial);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(lap.matrix)};
  const Eigen::VectorXd u0 = es.eigenvectors().col(0);
  REQUIRE(u0.maxCoeff() - u0.minCoeff() <= 1e-8);
}

TEST_CASE("normalized Laplacian eigenvalues live in [0, 2]", "[graph]") {
  Rng rng(22);
  const auto graph = oracle::random_connected_graph(10, 0.4, rng);
  const auto lap = laplacian(graph, LaplacianVariant::normalized);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(lap.matrix)};
  REQUIRE(es.eigenvalues().minCoeff() >= -1e-10);
  REQUIRE(es.eigenvalues().maxCoeff() <= 2.0 + 1e-10);
}

TEST_CASE("Laplacian structure invariants hold per variant", "[graph]") {
  Rng rng(23);
  const auto graph = oracle::random_connected_graph(14, 0.35, rng);

  const auto lc = laplacian(graph, LaplacianVariant::combinatorial);
  const Eigen::MatrixXd dc(lc.matrix);
  REQUIRE((dc - dc.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  REQUIRE(dc.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
  for (Index i = 0; i < dc.rows(); ++i)
    for (Index j = 0; j < dc.cols(); ++j)
      if (i != j) REQUIRE(dc(i, j) <= 0.0);

  const auto lrw = laplacian(graph, LaplacianVariant::random_walk);
  REQUIRE(Eigen::MatrixXd(lrw.matrix).rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zero-degree node rejects normalized variants", "[graph]") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
  w(0, 1) = w(1, 0) = 1.0;  // node 2 isolated
  const auto graph = SimilarityGraph::from_dense(w);
  REQUIRE_THROWS_WITH(laplacian(graph, LaplacianVariant::normalized),
                      Catch::Matchers::ContainsSubstring("node 2"));
  REQUIRE_NOTHROW(laplacian(graph, LaplacianVariant::combinatorial));
}

TEST_CASE("cuts vanish across disconnected cliques", "[graph]") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(6, 6);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      if (i != j) {
        w(i, j) = 1.0;
        w(i + 3, j + 3) = 1.0;
      }
  const auto graph = SimilarityGraph::from_dense(w);
  const Partition split({1, 1, 1, 2, 2, 2}, 2);
  REQUIRE(cut_cost(graph, split, CutKind::cut) == 0.0);
  REQUIRE(cut_cost(graph, split, CutKind::rcut) == 0.0);
  REQUIRE(cut_cost(graph, split, CutKind::ncut) == 0.0);
}

TEST_CASE("single unit edge split across gives rcut 1", "[graph]") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
  w(0, 1) = w(1, 0) = 1.0;
  const auto graph = SimilarityGraph::from_dense(w);
  REQUIRE(cut_cost(graph, Partition({1, 2}, 2), CutKind::rcut) == Approx(1.0));
}

TEST_CASE("cut costs match the brute-force pair sum over all 2-partitions", "[graph]") {
  Rng rng(31);
  const auto graph = oracle::random_connected_graph(10, 0.4, rng);
  const Eigen::MatrixXd w(graph.adjacency);
  const Eigen::VectorXd deg = w.rowwise().sum();
  for (std::uint64_t mask = 1; mask < (1u << 9); ++mask) {
    const auto labels = oracle::two_partition_labels(10, mask);
    const Partition part(labels, 2);

    double crossing = 0.0;
    double size1 = 0.0, size2 = 0.0, vol1 = 0.0, vol2 = 0.0;
    for (Index i = 0; i < 10; ++i) {
      const bool a = labels[static_cast<std::size_t>(i)] == 1;
      (a ? size1 : size2) += 1.0;
      (a ? vol1 : vol2) += deg[i];
      for (Index j = 0; j < 10; ++j)
        if (a != (labels[static_cast<std::size_t>(j)] == 1)) crossing += w(i, j);
    }
    crossing /= 2.0;  // each unordered pair was counted twice

    REQUIRE(cut_cost(graph, part, CutKind::cut) == Approx(crossing).margin(1e-12));
    REQUIRE(cut_cost(graph, part, CutKind::rcut) ==
            Approx(0.5 * (crossing / size1 + crossing / size2)).margin(1e-12));
    REQUIRE(cut_cost(graph, part, CutKind::ncut) ==
            Approx(0.5 * (crossing / vol1 + crossing / vol2)).margin(1e-12));
  }
}

TEST_CASE("empty cluster makes balanced cuts error out", "[graph]") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
  w(0, 1) = w(1, 0) = 1.0;
  const auto graph = SimilarityGraph::from_dense(w);
  const Partition degenerate({1, 1}, 2);
  REQUIRE_THROWS(cut_cost(graph, degenerate, CutKind::rcut));
  REQUIRE_THROWS(cut_cost(graph, degenerate, CutKind::ncut));
  REQUIRE_NOTHROW(cut_cost(graph, degenerate, CutKind::cut));
}

TEST_CASE("rcut trace equals twice rcut and matches the dense trace oracle", "[graph]") {
  Rng rng(41);
  const auto graph = oracle::random_connected_graph(8, 0.45, rng);
  const Eigen::MatrixXd l = oracle::dense_combinatorial(Eigen::MatrixXd(graph.adjacency));
  for (std::uint64_t mask : {0x3ULL, 0x55ULL, 0x1fULL, 0x91ULL}) {
    const auto labels = oracle::two_partition_labels(8, mask);
    const Partition part(labels, 2);

    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(8, 2);
    const auto sizes = part.cluster_sizes();
    for (Index i = 0; i < 8; ++i)
      c(i, labels[static_cast<std::size_t>(i)] - 1) =
          1.0 / std::sqrt(static_cast<double>(sizes[static_cast<std::size_t>(
                   labels[static_cast<std::size_t>(i)] - 1)]));
    const double dense_trace = (c.transpose() * l * c).trace();

    const double trace = rcut_trace(graph, part);
    REQUIRE(trace == Approx(dense_trace).margin(1e-10));
    REQUIRE(trace == Approx(2.0 * cut_cost(graph, part, CutKind::rcut)).epsilon(1e-10));
  }
}

TEST_CASE("rcut trace is zero on a disconnected-component partition", "[graph]") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  w(0, 1) = w(1, 0) = 2.0;
  w(2, 3) = w(3, 2) = 3.0;
  const auto graph = SimilarityGraph::from_dense(w);
  REQUIRE(rcut_trace(graph, Partition({1, 1, 2, 2}, 2)) == Approx(0.0).margin(1e-14));
}

TEST_CASE("trace identity holds exhaustively on small random graphs", "[graph]") {
  Rng rng(51);
  for (int g = 0; g < 4; ++g) {
    const auto graph = oracle::random_connected_graph(7, 0.4, rng);
    for (int k = 2; k <= 3; ++k) {
      oracle::for_each_partition(7, k, [&](const std::vector<int>& labels) {
        const Partition part(labels, k);
        const double lhs = rcut_trace(graph, part);
        const double rhs = 2.0 * cut_cost(graph, part, CutKind::rcut);
        REQUIRE(lhs == Approx(rhs).margin(1e-10 * std::max(1.0, rhs)));
      });
    }
  }
}

TEST_CASE("combinatorial quadratic form is the positive edge-difference sum", "[graph]") {
  Rng rng(61);
  const auto graph = oracle::random_connected_graph(15, 0.3, rng);
  const auto lap = laplacian(graph, LaplacianVariant::combinatorial);
  const Eigen::MatrixXd w(graph.adjacency);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::VectorXd x = rng.gaussian_matrix(15, 1).col(0);
    double expected = 0.0;
    for (Index i = 0; i < 15; ++i)
      for (Index j = 0; j < 15; ++j) expected += 0.5 * w(i, j) * (x[i] - x[j]) * (x[i] - x[j]);
    const double quad = x.dot(lap.matrix * x);
    REQUIRE(quad == Approx(expected).margin(1e-10 * std::max(1.0, expected)));
    REQUIRE(quad >= -1e-10);
  }
}

TEST_CASE("jl projection of the zero set is zero and norms are preserved on average",
          "[graph]") {
  Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(5, 8);
  PointSet zero_set;
  zero_set.data = zeros;  // bypass the finite-value ctor check path for zeros
  zero_set.validate();
  const auto projected = jl_project(zero_set, 4, 99);
  REQUIRE(projected.data.cwiseAbs().maxCoeff() == 0.0);

  // distribution-level norm preservation at d_out = d
  const auto points = gaussian_blobs(100, 60, 1, 1.0, 77);
  const double base = points.data.squaredNorm();
  double acc = 0.0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) acc += jl_project(points, 60, 1000 + s).data.squaredNorm();
  REQUIRE(acc / seeds == Approx(base).epsilon(0.10));
}

TEST_CASE("jl projection distorts pairwise distances by at most 1.5x at half dimension",
          "[graph]") {
  const auto points = gaussian_blobs(100, 50, 1, 1.0, 13);
  const auto projected = jl_project(points, 25, 5);
  double worst_high = 0.0;
  for (Index i = 0; i < 100; ++i)
    for (Index j = i + 1; j < 100; ++j) {
      const double before = (points.data.row(i) - points.data.row(j)).norm();
      const double after = (projected.data.row(i) - projected.data.row(j)).norm();
      worst_high = std::max(worst_high, after / before);
    }
  REQUIRE(worst_high <= 1.5);
}

TEST_CASE("point sets with NaN entries are rejected", "[graph]") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, std::nan(""), 0.0;
  REQUIRE_THROWS(PointSet(bad));
}
