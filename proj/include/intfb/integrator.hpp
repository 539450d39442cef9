#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "intfb/dynamics.hpp"

namespace intfb {

enum class Method { kFixedRk4, kAdaptiveRk45 };

struct IntegratorConfig {
  Method method = Method::kAdaptiveRk45;
  // Fixed RK4 step.
  double step = 1e-2;
  // Adaptive controls.
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double h_min = 1e-12;
  double h_max = std::numeric_limits<double>::infinity();
  // Never step across a flow breakpoint (piecewise-constant disturbance).
  bool align_breakpoints = true;

  void validate() const;
};

std::string to_string(Method method);
Method method_from_string(const std::string& name);

enum class StopReason { kSpanEnd, kConverged, kTMax };
std::string to_string(StopReason reason);

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  double max_error_estimate = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  StopReason reason = StopReason::kSpanEnd;
  IntegratorStats stats;
};

// Integrates `flow` from (t0, initial) to tf and returns the state at each of
// `sample_times` (strictly increasing, inside [t0, tf]). Samples between
// accepted steps come from the step's dense output. Throws kStepUnderflow if
// the adaptive step drops below h_min.
Trajectory integrate(const Flow& flow, const Eigen::VectorXd& initial, double t0, double tf,
                     const std::vector<double>& sample_times, const IntegratorConfig& cfg);

// Samples every `sample_dt` from t0 and stops at the first sample where
// metric(t, state) <= threshold, or at t_max.
struct StopRule {
  std::function<double(double, const Eigen::VectorXd&)> metric;
  double threshold = 0.0;
  double t_max = 0.0;
  double sample_dt = 0.0;
};

Trajectory integrate_to_convergence(const Flow& flow, const Eigen::VectorXd& initial, double t0,
                                    const IntegratorConfig& cfg, const StopRule& stop);

// n + 1 uniformly spaced times covering [t0, tf], endpoints exact.
std::vector<double> uniform_grid(double t0, double tf, int intervals);

}  // namespace intfb
