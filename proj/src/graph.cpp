#include "intfb/graph.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "intfb/error.hpp"

namespace intfb {

Graph::Graph(int m, std::vector<Edge> edges) : m_(m), edges_(std::move(edges)), adjacency_(static_cast<std::size_t>(m)) {
  for (const auto& [i, j] : edges_) {
    adjacency_[static_cast<std::size_t>(i)].push_back(j);
    adjacency_[static_cast<std::size_t>(j)].push_back(i);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

Graph Graph::from_neighbor_lists(const std::vector<std::vector<int>>& lists, int index_base) {
  const int m = static_cast<int>(lists.size());
  if (m == 0) throw Error(ErrorCode::kIndexOutOfRange, "graph needs at least one agent");

  std::vector<std::set<int>> sets(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    for (int raw : lists[static_cast<std::size_t>(i)]) {
      const int j = raw - index_base;
      if (j < 0 || j >= m) {
        throw Error(ErrorCode::kIndexOutOfRange,
                    "agent " + std::to_string(i + index_base) + " lists neighbor " + std::to_string(raw));
      }
      if (j != i) sets[static_cast<std::size_t>(i)].insert(j);
    }
  }

  std::vector<Edge> edges;
  for (int i = 0; i < m; ++i) {
    for (int j : sets[static_cast<std::size_t>(i)]) {
      if (!sets[static_cast<std::size_t>(j)].contains(i)) {
        throw Error(ErrorCode::kAsymmetricNeighbors, "agent " + std::to_string(i + index_base) + " lists " +
                                                         std::to_string(j + index_base) + " but not vice versa");
      }
      if (i < j) edges.emplace_back(i, j);
    }
  }
  return Graph(m, std::move(edges));
}

Graph Graph::from_edges(int m, const std::vector<Edge>& edges) {
  if (m <= 0) throw Error(ErrorCode::kIndexOutOfRange, "graph needs at least one agent");
  std::set<Edge> unique;
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= m || j >= m) {
      throw Error(ErrorCode::kIndexOutOfRange, "edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
    if (i == j) continue;
    unique.emplace(std::min(i, j), std::max(i, j));
  }
  return Graph(m, std::vector<Edge>(unique.begin(), unique.end()));
}

std::vector<int> Graph::degrees() const {
  std::vector<int> d;
  d.reserve(adjacency_.size());
  for (const auto& list : adjacency_) d.push_back(static_cast<int>(list.size()));
  return d;
}

int Graph::component_count() const {
  std::vector<char> seen(static_cast<std::size_t>(m_), 0);
  std::vector<int> stack;
  int components = 0;
  for (int start = 0; start < m_; ++start) {
    if (seen[static_cast<std::size_t>(start)]) continue;
    ++components;
    seen[static_cast<std::size_t>(start)] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adjacency_[static_cast<std::size_t>(v)]) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  return components;
}

bool Graph::is_connected() const { return component_count() == 1; }

Eigen::MatrixXd Graph::laplacian() const {
  // Integer accumulation, then a single exact conversion: row sums are 0.
  Eigen::MatrixXi lap = Eigen::MatrixXi::Zero(m_, m_);
  for (const auto& [i, j] : edges_) {
    lap(i, i) += 1;
    lap(j, j) += 1;
    lap(i, j) -= 1;
    lap(j, i) -= 1;
  }
  return lap.cast<double>();
}

Eigen::MatrixXd kron_laplacian(const Eigen::MatrixXd& laplacian, int n) {
  const Eigen::Index m = laplacian.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m * n, m * n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (laplacian(i, j) != 0.0) out.block(i * n, j * n, n, n).diagonal().setConstant(laplacian(i, j));
  return out;
}

}  // namespace intfb
