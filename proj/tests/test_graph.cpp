#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "intfb/error.hpp"
#include "intfb/graph.hpp"
#include "intfb/harness.hpp"
#include "intfb/random.hpp"

using namespace intfb;

TEST(Graph, PaperListsDropSelfMentions) {
  const Graph g = Graph::from_neighbor_lists(paper_neighbor_lists(), 1);
  EXPECT_EQ(g.agent_count(), 5);
  EXPECT_EQ(g.degrees(), (std::vector<int>{3, 2, 3, 3, 1}));
  EXPECT_EQ(g.edges().size(), 6u);
  for (const auto& [a, b] : g.edges()) EXPECT_LT(a, b);
  EXPECT_TRUE(g.is_connected());
}

TEST(Graph, TwoNodePath) {
  const Graph g = Graph::from_neighbor_lists({{2}, {1}}, 1);
  EXPECT_EQ(g.degrees(), (std::vector<int>{1, 1}));
  Eigen::Matrix2d expected;
  expected << 1, -1, -1, 1;
  EXPECT_EQ(g.laplacian(), Eigen::MatrixXd(expected));
}

TEST(Graph, AsymmetricListsRejected) {
  try {
    Graph::from_neighbor_lists({{2}, {}}, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAsymmetricNeighbors);
  }
}

TEST(Graph, OutOfRangeIndexRejected) {
  try {
    Graph::from_neighbor_lists({{1}, {0}}, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIndexOutOfRange);
  }
}

TEST(Graph, LaplacianOfPaperGraph) {
  const Eigen::MatrixXd lap = Graph::from_neighbor_lists(paper_neighbor_lists(), 1).laplacian();
  EXPECT_EQ(lap.diagonal(), Eigen::VectorXd((Eigen::VectorXd(5) << 3, 2, 3, 3, 1).finished()));
  EXPECT_EQ(lap, lap.transpose());
  EXPECT_EQ((lap * Eigen::VectorXd::Ones(5)).norm(), 0.0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (i != j) EXPECT_TRUE(lap(i, j) == 0.0 || lap(i, j) == -1.0);
}

TEST(Graph, TriangleSpectrum) {
  const Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g.laplacian()).eigenvalues();
  EXPECT_NEAR(ev[0], 0.0, 1e-12);
  EXPECT_NEAR(ev[1], 3.0, 1e-12);
  EXPECT_NEAR(ev[2], 3.0, 1e-12);
}

TEST(Graph, Connectivity) {
  EXPECT_FALSE(Graph::from_edges(2, {}).is_connected());
  EXPECT_EQ(Graph::from_edges(2, {}).component_count(), 2);
  EXPECT_TRUE(Graph::from_edges(1, {}).is_connected());
}

TEST(Graph, EdgesNormalized) {
  const Graph g = Graph::from_edges(3, {{1, 0}, {0, 1}, {2, 2}, {1, 2}});
  EXPECT_EQ(g.edges(), (std::vector<Graph::Edge>{{0, 1}, {1, 2}}));
}

TEST(Graph, KronLaplacian) {
  const Eigen::MatrixXd lap = Graph::from_edges(2, {{0, 1}}).laplacian();
  EXPECT_EQ(kron_laplacian(lap, 1), lap);
  const Eigen::MatrixXd k2 = kron_laplacian(lap, 2);
  const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_EQ(k2.block(0, 0, 2, 2), i2);
  EXPECT_EQ(k2.block(0, 2, 2, 2), -i2);
  EXPECT_EQ(k2.block(2, 0, 2, 2), -i2);
  EXPECT_EQ(k2.block(2, 2, 2, 2), i2);

  const Eigen::MatrixXd big = kron_laplacian(Graph::from_neighbor_lists(paper_neighbor_lists(), 1).laplacian(), 20);
  EXPECT_EQ(big.rows(), 100);
  EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXd>(big).rank(), 80);
}

TEST(Graph, KronKernelContainsConsensus) {
  Rng rng(11);
  const Eigen::MatrixXd k = kron_laplacian(Graph::from_neighbor_lists(paper_neighbor_lists(), 1).laplacian(), 4);
  const Eigen::VectorXd v = rng.uniform_vector(4, -1, 1);
  Eigen::VectorXd x(20);
  for (int i = 0; i < 5; ++i) x.segment(4 * i, 4) = v;
  EXPECT_LE((k * x).norm(), 1e-12);
}
