#include <gtest/gtest.h>

#include <memory>

#include "intfb/analysis.hpp"
#include "intfb/harness.hpp"
#include "intfb/random.hpp"

using namespace intfb;

namespace {

Graph random_graph(Rng& rng, int m) {
  std::vector<Graph::Edge> edges;
  const int count = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * m)));
  for (int e = 0; e < count; ++e)
    edges.emplace_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(m))),
                       static_cast<int>(rng.below(static_cast<std::uint64_t>(m))));
  return Graph::from_edges(m, edges);
}

RandomInstanceSpec spec_for(std::uint64_t seed) {
  RandomInstanceSpec spec;
  spec.m = 3 + static_cast<int>(seed % 4);
  spec.n = 2 + static_cast<int>(seed % 3);
  spec.n_i = static_cast<int>(seed % 2);
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST(Properties, LaplacianKernelMatchesComponents) {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(8));
    const Graph g = random_graph(rng, m);
    const Eigen::MatrixXd lap = g.laplacian();
    EXPECT_EQ((lap * Eigen::VectorXd::Ones(m)).norm(), 0.0);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(lap).eigenvalues();
    EXPECT_GE(ev.minCoeff(), -1e-12);
    int zeros = 0;
    for (Eigen::Index k = 0; k < ev.size(); ++k) zeros += std::abs(ev[k]) < 1e-9 ? 1 : 0;
    EXPECT_EQ(zeros, g.component_count());
    EXPECT_EQ(zeros == 1, g.is_connected());
  }
}

TEST(Properties, KronKernelOnRandomGraphs) {
  Rng rng(102);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(8));
    const int n = 1 + static_cast<int>(rng.below(4));
    const Eigen::MatrixXd k = kron_laplacian(random_graph(rng, m).laplacian(), n);
    const Eigen::VectorXd v = rng.uniform_vector(n, -1, 1);
    EXPECT_LE((k * v.replicate(m, 1)).norm(), 1e-12);
  }
}

TEST(Properties, EquilibriumCertification) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Problem p = generate_random_instance(spec_for(seed));
    const Eigen::VectorXd x_star = solve(p).x_star;
    const Eigen::VectorXd y_star = equilibrium_y_star(p, x_star);
    const IntegralRate r = rhs_integral({p.replicate(x_star), y_star}, p, 0.0);
    EXPECT_LE(r.dx.norm() + r.dy.norm(), 1e-8 * (1 + p.stacked_gradient(p.replicate(x_star)).norm())) << seed;
    EXPECT_LE(min_norm_multipliers(p, x_star).residual, 1e-8) << seed;
  }
}

TEST(Properties, UndisturbedRunInvariants) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    ExperimentConfig cfg;
    cfg.random = spec_for(seed);
    cfg.t_max = 15.0;
    cfg.samples = 150;
    const ExperimentResult r = run_experiment(cfg);
    const auto& rec = r.record;
    for (std::size_t k = 1; k < rec.size(); ++k) EXPECT_LE(rec.v[k], rec.v[k - 1] + 1e-9) << seed;
    for (std::size_t k = 0; k < rec.size(); ++k) {
      EXPECT_LE(rec.y1_norm[k], 1e-6) << seed;
      EXPECT_LE(rec.sum_y_norm[k], 1e-8) << seed;
      EXPECT_LE(rec.constraint_res[k], 1e-7) << seed;
    }
    EXPECT_TRUE(r.passed) << seed;
  }
}

TEST(Properties, SumOfYConservedUnderDisturbance) {
  ExperimentConfig cfg;
  cfg.random = spec_for(3);
  cfg.disturbance = DisturbanceSpec{};
  cfg.t_max = 20.0;
  const ExperimentResult r = run_experiment(cfg);
  for (double s : r.record.sum_y_norm) EXPECT_LE(s, 1e-8);
}

TEST(Properties, TangentFlowOnFeasibleStates) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Problem p = generate_random_instance(spec_for(seed * 2 + 1));
    Rng rng(seed);
    Eigen::VectorXd x(p.stacked_dim());
    for (int i = 0; i < p.agent_count(); ++i)
      p.agent(x, i) = p.constraints()[static_cast<std::size_t>(i)].randomize_feasible(seed + 50 * static_cast<std::uint64_t>(i), 2.0);
    const IntegralRate r = rhs_integral({x, rng.uniform_vector(p.stacked_dim(), -1, 1)}, p, 0.0);
    const Eigen::VectorXd dd = rhs_diminishing(x, p, 2.0, inverse_time_gain());
    for (int i = 0; i < p.agent_count(); ++i) {
      const auto& a = p.constraints()[static_cast<std::size_t>(i)].a();
      EXPECT_LE((a * p.agent(r.dx, i)).norm(), 1e-10);
      EXPECT_LE((a * p.agent(dd, i)).norm(), 1e-10);
    }
    EXPECT_LE(p.agent_sum(r.dy).norm(), 1e-12);
  }
}

TEST(Properties, NeighborOrderDoesNotMatter) {
  auto lists = paper_neighbor_lists();
  auto reversed = lists;
  for (auto& l : reversed) std::reverse(l.begin(), l.end());
  std::reverse(reversed.begin(), reversed.end());
  // Relabel agent i as 4 - i so the reversed lists describe the same graph.
  for (auto& l : reversed)
    for (int& j : l) j = 6 - j;
  const Graph a = Graph::from_neighbor_lists(lists, 1);
  const Graph b = Graph::from_neighbor_lists(reversed, 1);
  const std::vector<int> db = b.degrees();
  EXPECT_EQ(a.degrees(), std::vector<int>(db.rbegin(), db.rend()));

  const Problem p = build_paper_example_5agent(1);
  auto shuffled = lists;
  for (auto& l : shuffled) std::reverse(l.begin(), l.end());
  const Problem q(Graph::from_neighbor_lists(shuffled, 1), p.objectives(), p.constraints());
  Rng rng(7);
  const NetworkState s{rng.uniform_vector(100, -1, 1), rng.uniform_vector(100, -1, 1)};
  const IntegralRate r1 = rhs_integral(s, p, 0.0);
  const IntegralRate r2 = rhs_integral(s, q, 0.0);
  EXPECT_LE((r1.dx - r2.dx).norm(), 1e-14);
  EXPECT_LE((r1.dy - r2.dy).norm(), 1e-14);
}

TEST(Properties, ProjectionKeepsKernelVectors) {
  Rng rng(55);
  for (int k = 0; k < 30; ++k) {
    const int n = 3 + static_cast<int>(rng.below(5));
    const Eigen::MatrixXd a = rng.uniform_matrix(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1))), n, -1, 1);
    const auto c = LinearConstraint::build(a, Eigen::VectorXd::Zero(a.rows()));
    const Eigen::MatrixXd kernel = Eigen::FullPivLU<Eigen::MatrixXd>(a).kernel();
    const Eigen::VectorXd v = kernel * rng.uniform_vector(kernel.cols(), -1, 1);
    EXPECT_LE((c.projector() * v - v).norm(), 1e-10);
  }
}
