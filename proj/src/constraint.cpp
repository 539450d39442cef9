#include "intfb/constraint.hpp"

#include <string>

#include "intfb/error.hpp"
#include "intfb/random.hpp"

namespace intfb {

namespace {

int numerical_rank(const Eigen::VectorXd& singular_values, double tol) {
  if (singular_values.size() == 0) return 0;
  const double cutoff = tol * singular_values[0];
  int r = 0;
  for (Eigen::Index k = 0; k < singular_values.size(); ++k)
    if (singular_values[k] > cutoff) ++r;
  return r;
}

}  // namespace

LinearConstraint LinearConstraint::build(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol) {
  if (a.rows() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "A has " + std::to_string(a.rows()) + " rows but b has " + std::to_string(b.size()) + " entries");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidConfig, "rank tolerance must be positive");

  const Eigen::Index n = a.cols();
  LinearConstraint c;
  c.a_ = a;
  c.b_ = b;
  if (a.rows() == 0) {
    c.projector_ = Eigen::MatrixXd::Identity(n, n);
    c.x0_ = Eigen::VectorXd::Zero(n);
    return c;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  c.rank_ = numerical_rank(sigma, tol);
  const int r = c.rank_;

  const auto v_row = svd.matrixV().leftCols(r);
  c.projector_ = Eigen::MatrixXd::Identity(n, n) - v_row * v_row.transpose();
  // Exact symmetry; the product above is symmetric only up to rounding.
  c.projector_ = 0.5 * (c.projector_ + c.projector_.transpose()).eval();

  const Eigen::VectorXd ub = svd.matrixU().leftCols(r).transpose() * b;
  c.x0_ = v_row * (ub.array() / sigma.head(r).array()).matrix();

  const double res = (a * c.x0_ - b).norm();
  if (res > tol * (1.0 + b.norm())) {
    throw Error(ErrorCode::kBNotInImage, "least-squares residual " + std::to_string(res));
  }
  return c;
}

LinearConstraint LinearConstraint::unconstrained(int n) {
  return build(Eigen::MatrixXd(0, n), Eigen::VectorXd(0));
}

Eigen::VectorXd LinearConstraint::randomize_feasible(std::uint64_t seed, double scale) const {
  if (scale == 0.0) return x0_;
  Rng rng(seed);
  const Eigen::VectorXd z = rng.uniform_vector(dim(), -scale, scale);
  return x0_ + projector_ * z;
}

Eigen::MatrixXd stack_matrices(const std::vector<LinearConstraint>& constraints, int n) {
  Eigen::Index rows = 0;
  for (const auto& c : constraints) rows += c.rows();
  Eigen::MatrixXd stacked(rows, n);
  Eigen::Index at = 0;
  for (const auto& c : constraints) {
    if (c.dim() != n) throw Error(ErrorCode::kDimensionMismatch, "constraint dimension differs from n");
    stacked.middleRows(at, c.rows()) = c.a();
    at += c.rows();
  }
  return stacked;
}

Eigen::VectorXd stack_rhs(const std::vector<LinearConstraint>& constraints) {
  Eigen::Index rows = 0;
  for (const auto& c : constraints) rows += c.rows();
  Eigen::VectorXd stacked(rows);
  Eigen::Index at = 0;
  for (const auto& c : constraints) {
    stacked.segment(at, c.rows()) = c.b();
    at += c.rows();
  }
  return stacked;
}

RankDiagnostic stacked_rank_guard(const std::vector<LinearConstraint>& constraints, int n, double tol) {
  const Eigen::MatrixXd stacked = stack_matrices(constraints, n);
  RankDiagnostic d;
  d.n = n;
  if (stacked.rows() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    d.rank = numerical_rank(svd.singularValues(), tol);
  }
  d.status = d.rank >= n ? RankStatus::kWarn : RankStatus::kOk;
  return d;
}

}  // namespace intfb
