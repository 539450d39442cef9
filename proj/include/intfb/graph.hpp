#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace intfb {

// Undirected agent network with unit edge weights. Agents are indexed
// 0..m-1 internally; neighbor-list input may use any index base.
class Graph {
 public:
  using Edge = std::pair<int, int>;  // first < second

  // Builds a graph from per-agent neighbor lists. Self-mentions are dropped
  // (the coupling term x_i - x_i vanishes). Throws kAsymmetricNeighbors if j
  // lists i without i listing j, kIndexOutOfRange for indices outside
  // [index_base, index_base + m).
  static Graph from_neighbor_lists(const std::vector<std::vector<int>>& lists, int index_base = 0);
  // Zero-based edge list; duplicates and self-loops are discarded.
  static Graph from_edges(int m, const std::vector<Edge>& edges);

  int agent_count() const noexcept { return m_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adjacency_.at(static_cast<std::size_t>(i)); }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
  std::vector<int> degrees() const;

  bool is_connected() const;
  int component_count() const;

  // Degree matrix minus adjacency matrix.
  Eigen::MatrixXd laplacian() const;

  friend bool operator==(const Graph& a, const Graph& b) { return a.m_ == b.m_ && a.edges_ == b.edges_; }

 private:
  Graph(int m, std::vector<Edge> edges);

  int m_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

// L (x) I_n.
Eigen::MatrixXd kron_laplacian(const Eigen::MatrixXd& laplacian, int n);

}  // namespace intfb
