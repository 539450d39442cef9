#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "intfb/harness.hpp"
#include "intfb/metrics.hpp"
#include "intfb/random.hpp"

using namespace intfb;

TEST(Metrics, WMetric) {
  const Eigen::VectorXd x_star = Eigen::Vector3d(1, 2, 3);
  Eigen::VectorXd x(6);
  x << x_star, x_star;
  EXPECT_EQ(w_metric(x, x_star), 0.0);
  x[0] += 1.0;
  EXPECT_DOUBLE_EQ(w_metric(x, x_star), 1.0);
}

TEST(Metrics, WAtConsensusStates) {
  Rng rng(1);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd u = rng.uniform_vector(4, -1, 1);
    const Eigen::VectorXd x_star = rng.uniform_vector(4, -1, 1);
    Eigen::VectorXd x(12);
    x << u, u, u;
    EXPECT_NEAR(w_metric(x, x_star), 3 * (u - x_star).squaredNorm(), 1e-12);
    EXPECT_EQ(consensus_error(x, 4), 0.0);
  }
}

TEST(Metrics, ConsensusError) {
  Eigen::VectorXd x(4);
  x << 1, 0, -1, 0;
  EXPECT_DOUBLE_EQ(consensus_error(x, 2), 2.0);
}

TEST(Metrics, ConstraintViolation) {
  const Problem p = build_paper_example_5agent(1);
  Eigen::VectorXd x(100);
  for (int i = 0; i < 5; ++i) p.agent(x, i) = p.constraints()[static_cast<std::size_t>(i)].feasible_point();
  EXPECT_LE(constraint_violation(x, p.constraints()), 1e-10);
  x[3] += 1.0;
  EXPECT_GT(constraint_violation(x, p.constraints()), 1e-3);
  std::vector<LinearConstraint> free(2, LinearConstraint::unconstrained(2));
  EXPECT_EQ(constraint_violation(Eigen::VectorXd::Ones(4), free), 0.0);
}

TEST(Metrics, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-8), "1e-08");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Metrics, CsvLayout) {
  ExperimentConfig cfg = paper_fig1_config(1, "diminishing");
  cfg.t_max = 3.0;
  const ExperimentResult r = run_experiment(cfg);
  const std::string csv = to_csv(r.record);
  std::istringstream in(csv);
  std::string line;
  int meta = 0;
  while (std::getline(in, line) && line.rfind("# ", 0) == 0) {
    EXPECT_NE(line.find('='), std::string::npos);
    ++meta;
  }
  EXPECT_GT(meta, 5);
  EXPECT_EQ(line, "t,W,consensus_err,constraint_res,V,sum_y_norm,y1_norm");
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
    EXPECT_NE(line.find("nan"), std::string::npos);  // V is undefined for the baseline
    ++rows;
  }
  EXPECT_EQ(static_cast<std::size_t>(rows), r.record.size());
  EXPECT_EQ(r.record.w.size(), r.record.times.size());
  EXPECT_EQ(r.record.y1_norm.size(), r.record.times.size());
}

TEST(Metrics, FiveAgentRunDecreases) {
  ExperimentConfig cfg = paper_fig1_config(1, "integral");
  const ExperimentResult r = run_experiment(cfg);
  const auto& rec = r.record;
  std::size_t at_one = 0;
  while (rec.times[at_one] < 1.0) ++at_one;
  EXPECT_LT(rec.w[at_one], rec.w.front());
  EXPECT_LE(rec.consensus_err.back(), 1e-10);
  for (double c : rec.constraint_res) EXPECT_LE(c, 1e-7);
  for (std::size_t k = 0; k < rec.size(); ++k) {
    EXPECT_GE(rec.w[k], 0.0);
    EXPECT_GE(rec.consensus_err[k], 0.0);
    EXPECT_GE(rec.constraint_res[k], 0.0);
  }
}
