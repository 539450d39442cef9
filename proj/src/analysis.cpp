#include "intfb/analysis.hpp"

#include <cmath>
#include <sstream>

#include "intfb/error.hpp"
#include "intfb/oracle.hpp"

namespace intfb {

Eigen::VectorXd equilibrium_y_star(const Problem& p, const Eigen::VectorXd& x_star, double tol) {
  const Multipliers mult = min_norm_multipliers(p, x_star);
  const double scale = 1.0 + sum_gradient(p.objectives(), x_star).norm();
  if (mult.residual > tol * scale) {
    std::ostringstream msg;
    msg << "multiplier residual " << mult.residual << " exceeds " << tol * scale;
    throw Error(ErrorCode::kMultiplierFailure, msg.str());
  }
  Eigen::VectorXd y(p.stacked_dim());
  for (int i = 0; i < p.agent_count(); ++i) {
    const auto& c = p.constraints()[static_cast<std::size_t>(i)];
    auto yi = p.agent(y, i);
    yi = -p.objectives()[static_cast<std::size_t>(i)].gradient(x_star);
    if (!c.empty()) yi += c.a().transpose() * mult.z[static_cast<std::size_t>(i)];
  }
  const double sum = p.agent_sum(y).norm();
  if (sum > tol * scale) {
    std::ostringstream msg;
    msg << "equilibrium integral state sums to " << sum;
    throw Error(ErrorCode::kMultiplierFailure, msg.str());
  }
  return y;
}

CoordinateSplit build_split(const Problem& p, double tol) {
  CoordinateSplit split;
  split.block_projector = p.block_projector();
  const Eigen::MatrixXd& pb = split.block_projector;
  Eigen::MatrixXd m = pb * p.kron_laplacian() * pb;
  m = 0.5 * (m + m.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
  const double lambda_max = lambda.size() > 0 ? lambda[lambda.size() - 1] : 0.0;
  Eigen::Index kernel = 0;
  while (kernel < lambda.size() && lambda[kernel] <= tol * lambda_max) ++kernel;

  split.q = eig.eigenvectors();
  split.r1 = split.q.leftCols(kernel);
  split.r2 = split.q.rightCols(lambda.size() - kernel);
  split.s2 = split.r2.transpose() * m * split.r2;
  split.s2 = 0.5 * (split.s2 + split.s2.transpose()).eval();
  split.s2_inverse = split.s2.llt().solve(Eigen::MatrixXd::Identity(split.s2.rows(), split.s2.cols()));
  return split;
}

double lyapunov_v(const NetworkState& s, const CoordinateSplit& split, const Eigen::VectorXd& x_star,
                  const Eigen::VectorXd& y_star) {
  const Eigen::Index m = s.x.size() / x_star.size();
  const Eigen::VectorXd dx = s.x - x_star.replicate(m, 1);
  // X^T X = ||dx||^2 since Q is orthogonal.
  const Eigen::VectorXd y2 = split.r2.transpose() * (split.block_projector * (s.y - y_star));
  return 0.5 * (dx.squaredNorm() + y2.dot(split.s2_inverse * y2));
}

double lyapunov_v2(const NetworkState& s, const CoordinateSplit& split, const Eigen::VectorXd& x_star,
                   const Eigen::VectorXd& y_star) {
  const Eigen::Index m = s.x.size() / x_star.size();
  const Eigen::VectorXd xx = split.q.transpose() * (s.x - x_star.replicate(m, 1));
  const Eigen::VectorXd yy = split.q.transpose() * (split.block_projector * (s.y - y_star));
  return 0.5 * (xx + yy).squaredNorm();
}

double y1_component(const NetworkState& s, const CoordinateSplit& split, const Eigen::VectorXd& y_star) {
  if (split.r1.cols() == 0) return 0.0;
  return (split.r1.transpose() * (split.block_projector * (s.y - y_star))).norm();
}

RateFit rate_fit(const std::vector<double>& times, const std::vector<double>& w, double w_lo, double w_hi) {
  if (times.size() != w.size()) throw Error(ErrorCode::kDimensionMismatch, "times and W differ in length");
  std::vector<double> ts, ls;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] >= w_lo && w[k] <= w_hi && w[k] > 0.0) {
      ts.push_back(times[k]);
      ls.push_back(std::log(w[k]));
    }
  }
  if (ts.size() < 10) {
    throw Error(ErrorCode::kInsufficientSamples,
                std::to_string(ts.size()) + " samples in the fit window, need at least 10");
  }
  const auto n = static_cast<double>(ts.size());
  double mt = 0.0, ml = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k];
    ml += ls[k];
  }
  mt /= n;
  ml /= n;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    stt += (ts[k] - mt) * (ts[k] - mt);
    stl += (ts[k] - mt) * (ls[k] - ml);
    sll += (ls[k] - ml) * (ls[k] - ml);
  }
  RateFit fit;
  fit.samples = static_cast<int>(ts.size());
  fit.slope = stt > 0.0 ? stl / stt : 0.0;
  fit.intercept = ml - fit.slope * mt;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double e = ls[k] - (fit.intercept + fit.slope * ts[k]);
    ss_res += e * e;
  }
  fit.r_squared = sll > 0.0 ? 1.0 - ss_res / sll : 1.0;
  return fit;
}

double reduced_curvature(const Problem& p, const Eigen::VectorXd& x_star, const Eigen::MatrixXd& kernel_basis) {
  if (kernel_basis.cols() == 0) return 0.0;
  const Eigen::MatrixXd h = kernel_basis.transpose() * sum_hessian(p.objectives(), x_star) * kernel_basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (h + h.transpose()));
  return eig.eigenvalues()[0];
}

}  // namespace intfb
