#include <gtest/gtest.h>

#include <memory>

#include "intfb/analysis.hpp"
#include "intfb/dynamics.hpp"
#include "intfb/error.hpp"
#include "intfb/harness.hpp"
#include "intfb/oracle.hpp"
#include "intfb/random.hpp"

using namespace intfb;

namespace {

Problem two_node(int n, std::vector<Objective> fs) {
  return Problem(Graph::from_edges(2, {{0, 1}}), std::move(fs),
                 std::vector<LinearConstraint>(2, LinearConstraint::unconstrained(n)));
}

Eigen::VectorXd feasible_state(const Problem& p, std::uint64_t seed) {
  Eigen::VectorXd x(p.stacked_dim());
  for (int i = 0; i < p.agent_count(); ++i)
    p.agent(x, i) = p.constraints()[static_cast<std::size_t>(i)].randomize_feasible(seed + static_cast<std::uint64_t>(i), 1.0);
  return x;
}

}  // namespace

TEST(Problem, Validation) {
  EXPECT_THROW(Problem(Graph::from_edges(2, {}), {Objective::zero(1), Objective::zero(1)},
                       std::vector<LinearConstraint>(2, LinearConstraint::unconstrained(1))),
               Error);
  EXPECT_THROW(Problem(Graph::from_edges(2, {{0, 1}}), {Objective::zero(1)},
                       std::vector<LinearConstraint>(2, LinearConstraint::unconstrained(1))),
               Error);
  EXPECT_THROW(Problem(Graph::from_edges(2, {{0, 1}}), {Objective::zero(1), Objective::zero(2)},
                       std::vector<LinearConstraint>(2, LinearConstraint::unconstrained(1))),
               Error);
}

TEST(Dynamics, ConsensusFlow) {
  const Problem p = two_node(1, {Objective::zero(1), Objective::zero(1)});
  EXPECT_EQ(rhs_consensus((Eigen::VectorXd(2) << 1, 0).finished(), p), (Eigen::VectorXd(2) << -1, 1).finished());

  const Problem q = build_paper_example_5agent(1);
  EXPECT_LE(rhs_consensus(q.replicate(Eigen::VectorXd::Ones(20)), q).norm(), 1e-12);
  Rng rng(2);
  const Eigen::VectorXd dx = rhs_consensus(rng.uniform_vector(100, -1, 1), q);
  EXPECT_LE(q.agent_sum(dx).norm(), 1e-12);
  EXPECT_LE((q.apply_laplacian(dx) - q.kron_laplacian() * dx).norm(), 1e-12);
}

TEST(Dynamics, IntegralReducesToConsensus) {
  Rng rng(3);
  const Problem p(Graph::from_neighbor_lists(paper_neighbor_lists(), 1), std::vector<Objective>(5, Objective::zero(3)),
                  std::vector<LinearConstraint>(5, LinearConstraint::unconstrained(3)));
  const Eigen::VectorXd x = rng.uniform_vector(15, -1, 1);
  const IntegralRate r = rhs_integral(NetworkState::initial(x), p, 0.0);
  EXPECT_LE((r.dx - rhs_consensus(x, p)).norm(), 1e-15);
}

TEST(Dynamics, SingleAgentIsGradientDescent) {
  const Problem p(Graph::from_edges(1, {}), {Objective::scaled_squared_norm(1, Eigen::VectorXd::Zero(2))},
                  {LinearConstraint::unconstrained(2)});
  const Eigen::VectorXd x = (Eigen::VectorXd(2) << 0.5, -2).finished();
  const IntegralRate r = rhs_integral(NetworkState::initial(x), p, 0.0);
  EXPECT_LE((r.dx + 2 * x).norm(), 1e-15);
  EXPECT_EQ(r.dy, Eigen::VectorXd::Zero(2));
}

TEST(Dynamics, NetworkStatePacking) {
  const NetworkState s = NetworkState::initial(Eigen::VectorXd::LinSpaced(6, 1, 6));
  EXPECT_EQ(s.y, Eigen::VectorXd::Zero(6));
  const NetworkState t = NetworkState::unpack(s.pack());
  EXPECT_EQ(t.x, s.x);
  EXPECT_EQ(t.y, s.y);
}

TEST(Dynamics, EquilibriumIsFixedPoint) {
  const Problem p = build_paper_example_5agent(1);
  const Eigen::VectorXd x_star = solve(p).x_star;
  const Eigen::VectorXd y_star = equilibrium_y_star(p, x_star);
  const IntegralRate r = rhs_integral({p.replicate(x_star), y_star}, p, 0.0);
  EXPECT_LE(r.dx.norm(), 1e-8);
  EXPECT_LE(r.dy.norm(), 1e-12);
}

TEST(Dynamics, IntegralStructuralProperties) {
  const Problem p = build_paper_example_5agent(2);
  Rng rng(4);
  for (int k = 0; k < 10; ++k) {
    const NetworkState s{feasible_state(p, 100 + static_cast<std::uint64_t>(k)), rng.uniform_vector(100, -1, 1)};
    const IntegralRate r = rhs_integral(s, p, 0.0);
    EXPECT_LE(p.agent_sum(r.dy).norm(), 1e-12);
    for (int i = 0; i < 5; ++i) EXPECT_LE((p.constraints()[static_cast<std::size_t>(i)].a() * p.agent(r.dx, i)).norm(), 1e-10);

    // Shifting y along row spaces of the A_i leaves dx unchanged.
    NetworkState shifted = s;
    for (int i = 0; i < 5; ++i) {
      const auto& a = p.constraints()[static_cast<std::size_t>(i)].a();
      p.agent(shifted.y, i) += a.transpose() * rng.uniform_vector(a.rows(), -1, 1);
    }
    EXPECT_LE((rhs_integral(shifted, p, 0.0).dx - r.dx).norm(), 1e-10);
  }
}

TEST(Dynamics, DiminishingSpecialCases) {
  const Problem p = build_paper_example_5agent(1);
  Rng rng(6);
  const Eigen::VectorXd x = feasible_state(p, 7);
  const Eigen::VectorXd zero_gain = rhs_diminishing(x, p, 2.0, constant_gain(0.0));
  EXPECT_LE((zero_gain + p.project(p.kron_laplacian() * x)).norm(), 1e-12);

  const Problem q(Graph::from_neighbor_lists(paper_neighbor_lists(), 1),
                  {Objective::scaled_squared_norm(1, Eigen::VectorXd::Zero(3)), Objective::exp_sum(1, 3),
                   Objective::linear(Eigen::VectorXd::Ones(3)), Objective::zero(3), Objective::quartic_norm(Eigen::VectorXd::Ones(3))},
                  std::vector<LinearConstraint>(5, LinearConstraint::unconstrained(3)));
  const Eigen::VectorXd y = rng.uniform_vector(15, -1, 1);
  const Eigen::VectorXd expected = -(q.stacked_gradient(y) + q.kron_laplacian() * y);
  EXPECT_LE((rhs_diminishing(y, q, 3.0, constant_gain(1.0)) - expected).norm(), 1e-12);

  // At consensus with a nonzero summed gradient, the constant-gain flow still moves.
  const Problem r = two_node(3, {Objective::scaled_squared_norm(1, Eigen::VectorXd::Zero(3)),
                                 Objective::scaled_squared_norm(1, Eigen::VectorXd::Ones(3))});
  EXPECT_GT(rhs_diminishing(r.replicate(Eigen::VectorXd::Zero(3)), r, 1.0, constant_gain(1.0)).norm(), 0.1);
  EXPECT_DOUBLE_EQ(inverse_time_gain()(4.0), 0.25);
}

TEST(Disturbance, ZeroRange) {
  const DisturbanceSource d(1, 0.0, 0.0, 0.1, 4);
  for (double t : {0.0, 0.37, 12.0}) EXPECT_EQ(d.value(2, t), Eigen::VectorXd::Zero(4));
}

TEST(Disturbance, HeldWithinInterval) {
  const DisturbanceSource d(3, 0.0, 0.01, 0.1, 5);
  EXPECT_EQ(d.value(1, 0.05), d.value(1, 0.09));
  EXPECT_NE(d.value(1, 0.05), d.value(1, 0.15));
  EXPECT_NE(d.value(1, 0.05), d.value(2, 0.05));
  EXPECT_EQ(d.value(1, 0.3), DisturbanceSource(3, 0.0, 0.01, 0.1, 5).value(1, 0.3));
  EXPECT_EQ(d.interval(0.35), 3);
  EXPECT_DOUBLE_EQ(d.next_boundary(0.35), d.boundary(4));
  // 0.3 sits just below boundary(3) = 3 * 0.1 in floating point.
  EXPECT_EQ(d.interval(0.3), d.boundary(3) > 0.3 ? 2 : 3);
  EXPECT_EQ(d.interval(d.boundary(3)), 3);
  EXPECT_GT(d.next_boundary(0.25), 0.25);
}

TEST(Disturbance, Statistics) {
  const DisturbanceSource d(5, 0.0, 0.01, 0.1, 10);
  double sum = 0.0;
  int count = 0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd v = d.value(k % 7, 0.1 * k + 0.05);
    EXPECT_GE(v.minCoeff(), 0.0);
    EXPECT_LE(v.maxCoeff(), 0.01);
    sum += v.sum();
    count += 10;
  }
  EXPECT_EQ(count, 1000);
  EXPECT_GE(sum / count, 0.004);
  EXPECT_LE(sum / count, 0.006);
}

TEST(Disturbance, WrappedFlow) {
  auto p = std::make_shared<const Problem>(build_paper_example_5agent(1));
  const Flow base = integral_flow(p);
  const Flow zero = with_disturbance(base, DisturbanceSource(1, 0.0, 0.0, 0.1, 20), 5);
  Rng rng(9);
  const Eigen::VectorXd s = rng.uniform_vector(200, -1, 1);
  Eigen::VectorXd a(200), b(200);
  base.rhs(0.3, s, a);
  zero.rhs(0.3, s, b);
  EXPECT_EQ(a, b);

  const DisturbanceSource src(2, 0.0, 0.01, 0.1, 20);
  const Flow noisy = with_disturbance(base, src, 5);
  noisy.rhs(0.3, s, b);
  EXPECT_LE((b.head(100) - a.head(100) - src.stacked(5, 0.3)).norm(), 1e-13);
  EXPECT_EQ(b.tail(100), a.tail(100));
  ASSERT_TRUE(noisy.next_breakpoint);
  EXPECT_DOUBLE_EQ(noisy.next_breakpoint(0.3), src.next_boundary(0.3));

  // Outside the projection the disturbance leaves the constraint tangent space.
  const auto& a0 = p->constraints()[0].a();
  EXPECT_GT((a0 * (b.head(20) - a.head(20))).norm(), 0.0);
}
