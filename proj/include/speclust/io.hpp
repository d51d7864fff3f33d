#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "speclust/graph.hpp"
#include "speclust/types.hpp"

namespace speclust {

namespace detail {

inline bool parse_double(const std::string& token, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(token, &pos);
    return pos == token.size();
  } catch (const std::exception&) {
    return false;
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> tokens;
  std::string token;
  std::stringstream ss(line);
  while (std::getline(ss, token, ',')) {
    const auto first = token.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      tokens.push_back("");
      continue;
    }
    const auto last = token.find_last_not_of(" \t\r");
    tokens.push_back(token.substr(first, last - first + 1));
  }
  return tokens;
}

}  // namespace detail

// CSV, one row per point, d float columns, optional header line.
inline PointSet read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_points_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto tokens = detail::split_csv_line(line);
    std::vector<double> row;
    row.reserve(tokens.size());
    bool ok = !tokens.empty();
    for (const auto& tok : tokens) {
      double value = 0.0;
      if (!detail::parse_double(tok, value)) {
        ok = false;
        break;
      }
      row.push_back(value);
    }
    if (!ok) {
      if (first) {
        first = false;  // header
        continue;
      }
      throw std::runtime_error("read_points_csv: non-numeric row in " + path);
    }
    first = false;
    if (!rows.empty() && rows.front().size() != row.size())
      throw std::runtime_error("read_points_csv: inconsistent column count in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("read_points_csv: no data rows in " + path);
  Eigen::MatrixXd data(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < data.rows(); ++i)
    for (Index j = 0; j < data.cols(); ++j)
      data(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return PointSet(std::move(data));
}

inline void write_points_csv(const std::string& path, const PointSet& points) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_points_csv: cannot open " + path);
  out.precision(17);
  for (Index i = 0; i < points.n(); ++i) {
    for (Index j = 0; j < points.d(); ++j) {
      if (j > 0) out << ',';
      out << points.data(i, j);
    }
    out << '\n';
  }
}

// Edge list, lines "i j w" with 0-based ids; symmetrized on load (W = A + A^T,
// diagonal dropped). A missing weight column defaults to 1.
inline SimilarityGraph read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_edge_list: cannot open " + path);
  std::vector<Eigen::Triplet<double>> triplets;
  Index max_node = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    long long i = 0, j = 0;
    double w = 1.0;
    if (!(ss >> i >> j)) continue;
    ss >> w;
    if (i < 0 || j < 0) throw std::runtime_error("read_edge_list: negative node id");
    if (w < 0.0) throw std::runtime_error("read_edge_list: negative edge weight");
    if (i == j) continue;
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
    max_node = std::max<Index>(max_node, std::max<Index>(i, j));
  }
  if (max_node < 0) throw std::runtime_error("read_edge_list: no edges in " + path);
  const Index n = max_node + 1;
  SpMat a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  SpMat w = a + SpMat(a.transpose());
  return SimilarityGraph::from_adjacency(std::move(w));
}

inline void write_edge_list(const std::string& path, const SimilarityGraph& graph) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_edge_list: cannot open " + path);
  out.precision(17);
  for (Index i = 0; i < graph.n(); ++i)
    for (SpMat::InnerIterator it(graph.adjacency, i); it; ++it)
      if (it.col() > i) out << i << ' ' << it.col() << ' ' << it.value() << '\n';
}

// Labels CSV: "point_id,label" with a header row.
inline void write_labels_csv(const std::string& path, const Partition& partition) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_labels_csv: cannot open " + path);
  out << "point_id,label\n";
  for (Index i = 0; i < partition.n(); ++i)
    out << i << ',' << partition.labels[static_cast<std::size_t>(i)] << '\n';
}

inline Partition read_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_labels_csv: cannot open " + path);
  std::string line;
  std::vector<int> labels;
  int k = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line.find("point_id") != std::string::npos) {
      first = false;
      continue;
    }
    first = false;
    auto tokens = detail::split_csv_line(line);
    if (tokens.size() != 2) throw std::runtime_error("read_labels_csv: bad row");
    const int label = std::stoi(tokens[1]);
    labels.push_back(label);
    k = std::max(k, label);
  }
  return Partition(std::move(labels), k);
}

}  // namespace speclust
