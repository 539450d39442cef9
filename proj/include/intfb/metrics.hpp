#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "intfb/analysis.hpp"
#include "intfb/dynamics.hpp"
#include "intfb/integrator.hpp"

namespace intfb {

// sum_i ||x_i - x*||^2.
double w_metric(const Eigen::VectorXd& x, const Eigen::VectorXd& x_star);
// sum_i ||x_i - mean||^2.
double consensus_error(const Eigen::VectorXd& x, int n);
// max_i ||A_i x_i - b_i||; agents without constraints contribute 0.
double constraint_violation(const Eigen::VectorXd& x, const std::vector<LinearConstraint>& constraints);

// Lyapunov machinery attached to an integral-flow record.
struct AnalysisContext {
  const CoordinateSplit* split = nullptr;
  const Eigen::VectorXd* y_star = nullptr;
};

// Time series of one run. Series that do not apply to the flow (V, y1 for
// flows without an integral state) hold NaN.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<NetworkState> states;
  std::vector<double> w;
  std::vector<double> consensus_err;
  std::vector<double> constraint_res;
  std::vector<double> v;
  std::vector<double> v2;
  std::vector<double> sum_y_norm;
  std::vector<double> y1_norm;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::size_t size() const { return times.size(); }
};

// `has_integral_state` selects the [x; y] layout of the integral flow.
TrajectoryRecord build_record(const Problem& p, const Trajectory& traj, bool has_integral_state,
                              const Eigen::VectorXd& x_star, const AnalysisContext& analysis = {});

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// `# key=value` metadata lines, then `t,W,consensus_err,constraint_res,V,sum_y_norm,y1_norm`.
void write_csv(const TrajectoryRecord& rec, std::ostream& out);
std::string to_csv(const TrajectoryRecord& rec);

}  // namespace intfb
