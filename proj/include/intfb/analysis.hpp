#pragma once

#include <vector>

#include <Eigen/Dense>

#include "intfb/dynamics.hpp"

namespace intfb {

// y_i* = A_i^T z_i* - grad f_i(x*) with the minimum-norm multipliers. The
// result sums to zero over agents, so it lies in image(L_bar) and pairs with
// 1 (x) x* as an equilibrium of the integral flow. Throws kMultiplierFailure
// when the multiplier system residual exceeds `tol`.
Eigen::VectorXd equilibrium_y_star(const Problem& p, const Eigen::VectorXd& x_star, double tol = 1e-8);

// Orthogonal Q = [R1 R2] splitting R^{mn} into the kernel (R1) and range (R2)
// of M = P_bar L_bar P_bar, with S2 = R2^T M R2 positive definite.
struct CoordinateSplit {
  Eigen::MatrixXd q;
  Eigen::MatrixXd r1;
  Eigen::MatrixXd r2;
  Eigen::MatrixXd s2;
  Eigen::MatrixXd s2_inverse;
  Eigen::MatrixXd block_projector;  // P_bar, kept for the transforms below

  Eigen::Index kernel_dim() const { return r1.cols(); }
  Eigen::Index range_dim() const { return r2.cols(); }
};

// Eigenvalues <= tol * lambda_max go to the kernel block.
CoordinateSplit build_split(const Problem& p, double tol = 1e-9);

// V = 1/2 [X^T X + Y2^T S2^{-1} Y2] with X = Q^T(x - 1(x)x*), Y2 = R2^T P_bar (y - y*).
double lyapunov_v(const NetworkState& s, const CoordinateSplit& split, const Eigen::VectorXd& x_star,
                  const Eigen::VectorXd& y_star);
// V2 = 1/2 ||X + Y||^2 with Y = Q^T P_bar (y - y*). Diagnostic only.
double lyapunov_v2(const NetworkState& s, const CoordinateSplit& split, const Eigen::VectorXd& x_star,
                   const Eigen::VectorXd& y_star);
// ||R1^T P_bar (y - y*)||, conserved at zero along exact undisturbed flows.
double y1_component(const NetworkState& s, const CoordinateSplit& split, const Eigen::VectorXd& y_star);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int samples = 0;
};

// Least-squares line through (t, ln W) over samples with W in [w_lo, w_hi].
// Throws kInsufficientSamples when fewer than 10 samples qualify.
RateFit rate_fit(const std::vector<double>& times, const std::vector<double>& w, double w_lo, double w_hi);

// min eigenvalue of Z^T (sum of Hessians at x*) Z, the local strong-convexity
// margin of F on the feasible set. Zero when the kernel is empty.
double reduced_curvature(const Problem& p, const Eigen::VectorXd& x_star, const Eigen::MatrixXd& kernel_basis);

}  // namespace intfb
