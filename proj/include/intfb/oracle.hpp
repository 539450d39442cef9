#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "intfb/dynamics.hpp"

namespace intfb {

// Feasible set of the stacked constraints, written as x_feasible + basis * xi.
struct ReducedSubspace {
  Eigen::VectorXd x_feasible;  // minimum-norm solution of the stacked system
  Eigen::MatrixXd basis;       // orthonormal columns spanning the intersection of ker A_i
  int rank = 0;
  bool empty_kernel() const { return basis.cols() == 0; }
};

// Throws kInfeasible when the stacked system A x = b has no solution.
ReducedSubspace reduced_subspace(const std::vector<LinearConstraint>& constraints, int n,
                                 double rank_tol = LinearConstraint::kDefaultRankTol);

enum class OracleMethod { kAuto, kKktDirect, kReducedNewton };

struct OracleResult {
  Eigen::VectorXd x_star;
  double f_star = 0.0;
  double stationarity = 0.0;
  double feasibility = 0.0;
  std::string method;
  int iterations = 0;
  ReducedSubspace subspace;
};

// Centralized minimizer of sum_i f_i(x) subject to every A_i x = b_i.
// kAuto uses the KKT linear system when all objectives are quadratic and
// damped reduced-space Newton otherwise. Throws kNoDescent or kMaxIters when
// Newton fails to reach ||Z^T grad F|| <= tol.
OracleResult solve(const Problem& p, double tol = 1e-10, OracleMethod method = OracleMethod::kAuto);

struct KktResidual {
  double stationarity = 0.0;  // ||Z^T grad F(x)||
  double feasibility = 0.0;   // max_i ||A_i x - b_i||
};

KktResidual kkt_residual(const Problem& p, const Eigen::VectorXd& x, const ReducedSubspace& subspace);
KktResidual kkt_residual(const Problem& p, const Eigen::VectorXd& x);

// Minimum-norm z solving sum_i A_i^T z_i = sum_i grad f_i(x*).
struct Multipliers {
  std::vector<Eigen::VectorXd> z;  // one block per agent, n_i entries each
  double residual = 0.0;
};

Multipliers min_norm_multipliers(const Problem& p, const Eigen::VectorXd& x_star);

}  // namespace intfb
