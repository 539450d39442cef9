#include "intfb/oracle.hpp"

#include <cmath>
#include <sstream>

#include "intfb/error.hpp"

namespace intfb {

namespace {

constexpr int kMaxNewtonIters = 200;
constexpr double kInitialRegularization = 1e-8;

// F(x) = 0.5 x^T H x - r^T x + const for all-quadratic problems.
void quadratic_model(const Problem& p, Eigen::MatrixXd& h, Eigen::VectorXd& r) {
  const int n = p.dim();
  h = Eigen::MatrixXd::Zero(n, n);
  r = Eigen::VectorXd::Zero(n);
  for (const auto& f : p.objectives()) {
    if (const auto* q = std::get_if<ScaledSquaredNorm>(&f.form())) {
      h.diagonal().array() += 2.0 * q->weight;
      r += 2.0 * q->weight * q->center;
    } else if (const auto* l = std::get_if<Linear>(&f.form())) {
      r -= l->slope;
    }
  }
}

bool all_quadratic(const Problem& p) {
  for (const auto& f : p.objectives())
    if (!f.is_quadratic()) return false;
  return true;
}

Eigen::VectorXd solve_kkt_direct(const Problem& p) {
  const int n = p.dim();
  const Eigen::MatrixXd a = stack_matrices(p.constraints(), n);
  const Eigen::VectorXd b = stack_rhs(p.constraints());
  Eigen::MatrixXd h;
  Eigen::VectorXd r;
  quadratic_model(p, h, r);

  const Eigen::Index k = a.rows();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
  kkt.topLeftCorner(n, n) = h;
  kkt.topRightCorner(n, k) = a.transpose();
  kkt.bottomLeftCorner(k, n) = a;
  Eigen::VectorXd rhs(n + k);
  rhs << r, b;
  // Redundant constraint rows make the system singular; take the
  // minimum-norm solution.
  const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  return sol.head(n);
}

Eigen::VectorXd solve_reduced_newton(const Problem& p, const ReducedSubspace& sub, double tol, int& iterations) {
  const auto& fs = p.objectives();
  const Eigen::MatrixXd& z = sub.basis;
  Eigen::VectorXd x = sub.x_feasible;
  iterations = 0;
  if (z.cols() == 0) return x;

  for (; iterations < kMaxNewtonIters; ++iterations) {
    const Eigen::VectorXd g = z.transpose() * sum_gradient(fs, x);
    const double gnorm = g.norm();
    if (gnorm <= tol) return x;

    const Eigen::MatrixXd hr = z.transpose() * sum_hessian(fs, x) * z;
    Eigen::VectorXd d;
    for (double lambda = kInitialRegularization;; lambda *= 10.0) {
      Eigen::LLT<Eigen::MatrixXd> llt(hr + lambda * Eigen::MatrixXd::Identity(hr.rows(), hr.cols()));
      if (llt.info() == Eigen::Success) {
        d = -llt.solve(g);
        if (d.allFinite()) break;
      }
      if (lambda > 1e12) throw Error(ErrorCode::kNoDescent, "reduced Hessian cannot be regularized");
    }

    const double f0 = sum_value(fs, x);
    const double slope = g.dot(d);
    double step = 1.0;
    bool moved = false;
    while (step > 1e-12) {
      const Eigen::VectorXd trial = x + step * (z * d);
      const double f1 = sum_value(fs, trial);
      if (std::isfinite(f1) && f1 <= f0 + 1e-4 * step * slope) {
        x = trial;
        moved = true;
        break;
      }
      // Near the optimum the decrease drops below rounding; accept a full
      // step that still shrinks the reduced gradient.
      if (step == 1.0 && std::isfinite(f1) && std::abs(slope) <= 1e-12 * (1.0 + std::abs(f0)) &&
          (z.transpose() * sum_gradient(fs, trial)).norm() < gnorm) {
        x = trial;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      std::ostringstream msg;
      msg << "line search stalled at iteration " << iterations << " with reduced gradient " << gnorm;
      throw Error(ErrorCode::kNoDescent, msg.str());
    }
  }
  const double gnorm = (z.transpose() * sum_gradient(fs, x)).norm();
  if (gnorm <= tol) return x;
  std::ostringstream msg;
  msg << "reduced gradient " << gnorm << " after " << kMaxNewtonIters << " iterations";
  throw Error(ErrorCode::kMaxIters, msg.str());
}

}  // namespace

ReducedSubspace reduced_subspace(const std::vector<LinearConstraint>& constraints, int n, double rank_tol) {
  const Eigen::MatrixXd a = stack_matrices(constraints, n);
  const Eigen::VectorXd b = stack_rhs(constraints);
  ReducedSubspace sub;
  if (a.rows() == 0) {
    sub.x_feasible = Eigen::VectorXd::Zero(n);
    sub.basis = Eigen::MatrixXd::Identity(n, n);
    return sub;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  int r = 0;
  for (Eigen::Index k = 0; k < sigma.size(); ++k)
    if (sigma[k] > rank_tol * sigma[0]) ++r;
  sub.rank = r;
  const auto v_row = svd.matrixV().leftCols(r);
  const Eigen::VectorXd ub = svd.matrixU().leftCols(r).transpose() * b;
  sub.x_feasible = v_row * (ub.array() / sigma.head(r).array()).matrix();
  sub.basis = svd.matrixV().rightCols(n - r);

  const double res = (a * sub.x_feasible - b).norm();
  if (res > 1e-9 * (1.0 + b.norm())) {
    std::ostringstream msg;
    msg << "stacked constraints inconsistent, residual " << res;
    throw Error(ErrorCode::kInfeasible, msg.str());
  }
  return sub;
}

KktResidual kkt_residual(const Problem& p, const Eigen::VectorXd& x, const ReducedSubspace& subspace) {
  KktResidual r;
  r.stationarity = (subspace.basis.transpose() * sum_gradient(p.objectives(), x)).norm();
  for (const auto& c : p.constraints())
    if (!c.empty()) r.feasibility = std::max(r.feasibility, c.residual(x).norm());
  return r;
}

KktResidual kkt_residual(const Problem& p, const Eigen::VectorXd& x) {
  return kkt_residual(p, x, reduced_subspace(p.constraints(), p.dim()));
}

OracleResult solve(const Problem& p, double tol, OracleMethod method) {
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidConfig, "oracle tolerance must be positive");
  OracleResult out;
  out.subspace = reduced_subspace(p.constraints(), p.dim());

  if (method == OracleMethod::kAuto) method = all_quadratic(p) ? OracleMethod::kKktDirect : OracleMethod::kReducedNewton;
  if (method == OracleMethod::kKktDirect) {
    if (!all_quadratic(p)) throw Error(ErrorCode::kInvalidConfig, "KKT direct solve needs all-quadratic objectives");
    out.x_star = solve_kkt_direct(p);
    out.method = "kkt_direct";
  } else {
    out.x_star = solve_reduced_newton(p, out.subspace, tol, out.iterations);
    out.method = "reduced_newton";
  }

  const KktResidual r = kkt_residual(p, out.x_star, out.subspace);
  out.stationarity = r.stationarity;
  out.feasibility = r.feasibility;
  out.f_star = sum_value(p.objectives(), out.x_star);
  return out;
}

Multipliers min_norm_multipliers(const Problem& p, const Eigen::VectorXd& x_star) {
  const int n = p.dim();
  const Eigen::VectorXd g = sum_gradient(p.objectives(), x_star);
  const Eigen::MatrixXd at = stack_matrices(p.constraints(), n).transpose();

  Multipliers out;
  Eigen::VectorXd z_all;
  if (at.cols() == 0) {
    z_all.resize(0);
    out.residual = g.norm();
  } else {
    z_all = at.completeOrthogonalDecomposition().solve(g);
    out.residual = (at * z_all - g).norm();
  }
  Eigen::Index at_row = 0;
  for (const auto& c : p.constraints()) {
    out.z.push_back(z_all.segment(at_row, c.rows()));
    at_row += c.rows();
  }
  return out;
}

}  // namespace intfb
