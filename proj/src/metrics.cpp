#include "intfb/metrics.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace intfb {

double w_metric(const Eigen::VectorXd& x, const Eigen::VectorXd& x_star) {
  const Eigen::Index n = x_star.size();
  const Eigen::Index m = x.size() / n;
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) total += (x.segment(i * n, n) - x_star).squaredNorm();
  return total;
}

double consensus_error(const Eigen::VectorXd& x, int n) {
  // Offsets from agent 0 keep an exact consensus at exactly zero.
  const Eigen::Index m = x.size() / n;
  const Eigen::VectorXd base = x.head(n);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 1; i < m; ++i) mean += x.segment(i * n, n) - base;
  mean /= static_cast<double>(m);
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) total += (x.segment(i * n, n) - base - mean).squaredNorm();
  return total;
}

double constraint_violation(const Eigen::VectorXd& x, const std::vector<LinearConstraint>& constraints) {
  double worst = 0.0;
  Eigen::Index at = 0;
  for (const auto& c : constraints) {
    const Eigen::Index n = c.dim();
    if (!c.empty()) worst = std::max(worst, c.residual(x.segment(at, n)).norm());
    at += n;
  }
  return worst;
}

TrajectoryRecord build_record(const Problem& p, const Trajectory& traj, bool has_integral_state,
                              const Eigen::VectorXd& x_star, const AnalysisContext& analysis) {
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  const Eigen::Index mn = p.stacked_dim();
  const bool lyapunov = has_integral_state && analysis.split && analysis.y_star;

  TrajectoryRecord rec;
  rec.times = traj.times;
  const std::size_t count = traj.states.size();
  rec.states.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Eigen::VectorXd& s = traj.states[k];
    NetworkState state = has_integral_state ? NetworkState{s.head(mn), s.tail(mn)}
                                            : NetworkState{s, Eigen::VectorXd::Zero(mn)};
    rec.w.push_back(w_metric(state.x, x_star));
    rec.consensus_err.push_back(consensus_error(state.x, p.dim()));
    rec.constraint_res.push_back(constraint_violation(state.x, p.constraints()));
    rec.sum_y_norm.push_back(has_integral_state ? p.agent_sum(state.y).norm() : kNan);
    if (lyapunov) {
      rec.v.push_back(lyapunov_v(state, *analysis.split, x_star, *analysis.y_star));
      rec.v2.push_back(lyapunov_v2(state, *analysis.split, x_star, *analysis.y_star));
      rec.y1_norm.push_back(y1_component(state, *analysis.split, *analysis.y_star));
    } else {
      rec.v.push_back(kNan);
      rec.v2.push_back(kNan);
      rec.y1_norm.push_back(kNan);
    }
    rec.states.push_back(std::move(state));
  }
  return rec;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const TrajectoryRecord& rec, std::ostream& out) {
  for (const auto& [key, value] : rec.metadata) out << "# " << key << '=' << value << '\n';
  out << "t,W,consensus_err,constraint_res,V,sum_y_norm,y1_norm\n";
  for (std::size_t k = 0; k < rec.size(); ++k) {
    out << format_double(rec.times[k]) << ',' << format_double(rec.w[k]) << ',' << format_double(rec.consensus_err[k])
        << ',' << format_double(rec.constraint_res[k]) << ',' << format_double(rec.v[k]) << ','
        << format_double(rec.sum_y_norm[k]) << ',' << format_double(rec.y1_norm[k]) << '\n';
  }
}

std::string to_csv(const TrajectoryRecord& rec) {
  std::ostringstream out;
  write_csv(rec, out);
  return out.str();
}

}  // namespace intfb
