#include <gtest/gtest.h>

#include <cmath>

#include "intfb/analysis.hpp"
#include "intfb/error.hpp"
#include "intfb/harness.hpp"
#include "intfb/oracle.hpp"

using namespace intfb;

namespace {

Problem free_problem(std::vector<Objective> fs, int n) {
  const int m = static_cast<int>(fs.size());
  std::vector<Graph::Edge> path;
  for (int i = 1; i < m; ++i) path.emplace_back(i - 1, i);
  return Problem(Graph::from_edges(m, path), std::move(fs),
                 std::vector<LinearConstraint>(static_cast<std::size_t>(m), LinearConstraint::unconstrained(n)));
}

}  // namespace

TEST(Analysis, YStarIdenticalObjectives) {
  const Problem p = free_problem(std::vector<Objective>(3, Objective::scaled_squared_norm(2, Eigen::Vector2d(1, -1))), 2);
  const Eigen::VectorXd y = equilibrium_y_star(p, solve(p).x_star);
  EXPECT_LE(y.norm(), 1e-12);
}

TEST(Analysis, YStarTwoAgents) {
  const Eigen::VectorXd c = Eigen::Vector2d(0.8, -0.4);
  const Problem p = free_problem({Objective::scaled_squared_norm(1, Eigen::VectorXd::Zero(2)), Objective::scaled_squared_norm(1, c)}, 2);
  const Eigen::VectorXd y = equilibrium_y_star(p, solve(p).x_star);
  EXPECT_LE((y.head(2) + c).norm(), 1e-12);
  EXPECT_LE((y.tail(2) - c).norm(), 1e-12);
}

TEST(Analysis, YStarPaperFixedPoint) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Problem p = build_paper_example_5agent(seed);
    const Eigen::VectorXd x_star = solve(p).x_star;
    const Eigen::VectorXd y = equilibrium_y_star(p, x_star);
    EXPECT_LE(p.agent_sum(y).norm(), 1e-10);
    const IntegralRate r = rhs_integral({p.replicate(x_star), y}, p, 0.0);
    const double scale = 1 + p.stacked_gradient(p.replicate(x_star)).norm();
    EXPECT_LE(r.dx.norm() + r.dy.norm(), 1e-8 * scale);
  }
}

TEST(Analysis, SplitUnconstrained) {
  const Problem p = free_problem(std::vector<Objective>(4, Objective::zero(3)), 3);
  const CoordinateSplit s = build_split(p);
  EXPECT_EQ(s.kernel_dim(), 3);
  EXPECT_EQ(s.range_dim(), 9);
}

TEST(Analysis, SplitSingleAgent) {
  const Problem p(Graph::from_edges(1, {}), {Objective::zero(3)}, {LinearConstraint::unconstrained(3)});
  const CoordinateSplit s = build_split(p);
  EXPECT_EQ(s.kernel_dim(), 3);
  EXPECT_EQ(s.range_dim(), 0);
}

TEST(Analysis, SplitPaperInstance) {
  const Problem p = build_paper_example_5agent(1);
  const CoordinateSplit s = build_split(p);
  const Eigen::Index mn = p.stacked_dim();
  EXPECT_EQ(s.kernel_dim() + s.range_dim(), mn);
  EXPECT_LE((s.q.transpose() * s.q - Eigen::MatrixXd::Identity(mn, mn)).norm(), 1e-10);
  const Eigen::MatrixXd pb = p.block_projector();
  const Eigen::MatrixXd m = pb * p.kron_laplacian() * pb;
  EXPECT_LE((s.r1.transpose() * m * s.r1).norm(), 1e-8);
  EXPECT_LE((s.s2 - s.s2.transpose()).norm(), 1e-10);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s.s2).eigenvalues()[0], 0.0);

  // 1 (x) u with u in every ker A_i lies in the kernel block.
  const ReducedSubspace sub = reduced_subspace(p.constraints(), p.dim());
  const Eigen::VectorXd v = p.replicate(sub.basis.col(0));
  EXPECT_LE((v - s.r1 * (s.r1.transpose() * v)).norm(), 1e-8);
}

TEST(Analysis, LyapunovBasics) {
  const Problem p = build_paper_example_5agent(1);
  const Eigen::VectorXd x_star = solve(p).x_star;
  const Eigen::VectorXd y_star = equilibrium_y_star(p, x_star);
  const CoordinateSplit s = build_split(p);
  const NetworkState eq{p.replicate(x_star), y_star};
  EXPECT_NEAR(lyapunov_v(eq, s, x_star, y_star), 0.0, 1e-20);
  NetworkState off = eq;
  off.x[7] += 1.0;
  EXPECT_NEAR(lyapunov_v(off, s, x_star, y_star), 0.5, 1e-12);
  EXPECT_NEAR(lyapunov_v2(eq, s, x_star, y_star), 0.0, 1e-20);
}

TEST(Analysis, Y1Component) {
  const Problem p = build_paper_example_5agent(1);
  const Eigen::VectorXd x_star = solve(p).x_star;
  const Eigen::VectorXd y_star = equilibrium_y_star(p, x_star);
  const CoordinateSplit s = build_split(p);
  const NetworkState start = NetworkState::initial(p.replicate(Eigen::VectorXd::Zero(20)));
  EXPECT_LE(y1_component(start, s, y_star), 1e-8);

  const Eigen::VectorXd corrupted = y_star + s.r1.col(0);
  EXPECT_GT(y1_component(start, s, corrupted), 0.5);
}

TEST(Analysis, RateFitExponential) {
  std::vector<double> t, w;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(0.1 * k);
    w.push_back(std::exp(-2 * t.back()));
  }
  const RateFit f = rate_fit(t, w, 1e-9, 1.0);
  EXPECT_NEAR(f.slope, -2.0, 1e-6);
  EXPECT_GE(f.r_squared, 1 - 1e-12);
  EXPECT_EQ(f.samples, 101);
}

TEST(Analysis, RateFitPowerLaw) {
  std::vector<double> t, w;
  for (int k = 0; k <= 990; ++k) {
    t.push_back(1.0 + 0.1 * k);
    w.push_back(1.0 / t.back());
  }
  const RateFit full = rate_fit(t, w, 0.0, 1.0);
  EXPECT_LT(full.r_squared, 0.9);
  const RateFit late = rate_fit(t, w, 0.0, 0.05);
  EXPECT_LT(std::abs(late.slope), std::abs(full.slope));
}

TEST(Analysis, RateFitInsufficient) {
  try {
    rate_fit({0, 1, 2}, {1, 0.5, 0.25}, 0.0, 1.0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientSamples);
  }
}

TEST(Analysis, ReducedCurvature) {
  const Problem p = build_paper_example_5agent(1);
  const OracleResult r = solve(p);
  EXPECT_GT(reduced_curvature(p, r.x_star, r.subspace.basis), 1e-8);
  const Problem relaxed = build_relaxed_example_5agent(1);
  const OracleResult q = solve(relaxed);
  EXPECT_GT(reduced_curvature(relaxed, q.x_star, q.subspace.basis), 1e-8);
}
