#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace intfb {

// Local equality constraint A x = b together with the orthogonal projector
// onto ker A. The projector and the minimum-norm feasible point are computed
// once, from a single SVD of A.
class LinearConstraint {
 public:
  static constexpr double kDefaultRankTol = 1e-10;

  // A has n columns and any number of rows (zero rows = unconstrained agent).
  // Singular values <= tol * sigma_max count as zero. Throws kBNotInImage when
  // min ||Ax - b|| > tol * (1 + ||b||), kDimensionMismatch when b does not
  // match A.
  static LinearConstraint build(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol = kDefaultRankTol);
  static LinearConstraint unconstrained(int n);

  const Eigen::MatrixXd& a() const noexcept { return a_; }
  const Eigen::VectorXd& b() const noexcept { return b_; }
  const Eigen::MatrixXd& projector() const noexcept { return projector_; }
  int rank() const noexcept { return rank_; }
  int dim() const noexcept { return static_cast<int>(a_.cols()); }
  int rows() const noexcept { return static_cast<int>(a_.rows()); }
  bool empty() const noexcept { return a_.rows() == 0; }

  // Minimum-norm solution of A x = b.
  const Eigen::VectorXd& feasible_point() const noexcept { return x0_; }
  // feasible_point() + P z with z uniform in [-scale, scale]^n.
  Eigen::VectorXd randomize_feasible(std::uint64_t seed, double scale) const;

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const { return a_ * x - b_; }

 private:
  LinearConstraint() = default;

  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  Eigen::MatrixXd projector_;
  Eigen::VectorXd x0_;
  int rank_ = 0;
};

enum class RankStatus { kOk, kWarn };

struct RankDiagnostic {
  int rank = 0;
  int n = 0;
  RankStatus status = RankStatus::kOk;
};

// Numerical rank of col{A_1, ..., A_m}. A full-rank stack pins the consensus
// value to at most one point, so it is flagged.
RankDiagnostic stacked_rank_guard(const std::vector<LinearConstraint>& constraints, int n,
                                  double tol = LinearConstraint::kDefaultRankTol);

// Vertical stack of all constraint rows and right-hand sides.
Eigen::MatrixXd stack_matrices(const std::vector<LinearConstraint>& constraints, int n);
Eigen::VectorXd stack_rhs(const std::vector<LinearConstraint>& constraints);

}  // namespace intfb
