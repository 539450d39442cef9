#include "intfb/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "intfb/error.hpp"

namespace intfb {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
// Quartic correction to the cubic Hermite interpolant (Hairer's dopri5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI controller exponents and step-factor limits.
constexpr double kSafety = 0.9;
constexpr double kAlpha = 0.17;
constexpr double kBeta = 0.04;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;

class Stepper {
 public:
  Stepper(const Flow& flow, const IntegratorConfig& cfg, double t0, const Eigen::VectorXd& y0)
      : flow_(flow), cfg_(cfg), t_(t0), y_(y0) {
    if (y0.size() != flow.dim) {
      throw Error(ErrorCode::kDimensionMismatch, "initial state has " + std::to_string(y0.size()) +
                                                     " entries, flow expects " + std::to_string(flow.dim));
    }
    begin_segment();
    if (cfg_.method == Method::kAdaptiveRk45) h_ = initial_step();
  }

  double t() const { return t_; }
  double t_prev() const { return t_prev_; }
  const Eigen::VectorXd& y() const { return y_; }
  const IntegratorStats& stats() const { return stats_; }

  // Takes one accepted step, landing exactly on `limit` if it is reached.
  void step(double limit) {
    const double stop = std::min(limit, segment_end_);
    if (cfg_.method == Method::kFixedRk4) {
      rk4_step(stop);
    } else {
      rk45_step(stop);
    }
    if (t_ >= segment_end_) {
      begin_segment();
    }
  }

  // Dense output on the last accepted step.
  Eigen::VectorXd interpolate(double t) const {
    const double theta = (t - t_prev_) / h_last_;
    const double theta1 = 1.0 - theta;
    return rcont1_ + theta * (rcont2_ + theta1 * (rcont3_ + theta * (rcont4_ + theta1 * rcont5_)));
  }

 private:
  void eval(double t, const Eigen::VectorXd& y, Eigen::VectorXd& out) {
    // Inside a segment the flow is smooth; the right endpoint belongs to the
    // next piece, so evaluate its left limit instead.
    if (std::isfinite(segment_end_)) t = std::min(t, std::nextafter(segment_end_, -INFINITY));
    flow_.rhs(t, y, out);
    ++stats_.rhs_evals;
  }

  void begin_segment() {
    segment_end_ = INFINITY;
    if (cfg_.align_breakpoints && flow_.next_breakpoint) segment_end_ = flow_.next_breakpoint(t_);
    eval(t_, y_, f_);
  }

  double weighted_rms(const Eigen::VectorXd& v, const Eigen::VectorXd& ya, const Eigen::VectorXd& yb) const {
    const Eigen::ArrayXd scale = cfg_.abs_tol + cfg_.rel_tol * ya.array().abs().max(yb.array().abs());
    return std::sqrt((v.array() / scale).square().mean());
  }

  double initial_step() {
    const double d0 = weighted_rms(y_, y_, y_);
    const double d1n = weighted_rms(f_, y_, y_);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, cfg_.h_max);
    Eigen::VectorXd y1 = y_ + h0 * f_;
    Eigen::VectorXd f1;
    eval(t_ + h0, y1, f1);
    const double d2 = weighted_rms(f1 - f_, y_, y_) / h0;
    const double dmax = std::max(d1n, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
    return std::min({100.0 * h0, h1, cfg_.h_max});
  }

  void accept(double t_new, double h, Eigen::VectorXd y_new, const Eigen::VectorXd& f_new) {
    t_prev_ = t_;
    h_last_ = h;
    rcont1_ = y_;
    rcont2_ = y_new - y_;
    rcont3_ = h * f_ - rcont2_;
    rcont4_ = rcont2_ - h * f_new - rcont3_;
    t_ = t_new;
    y_ = std::move(y_new);
    f_ = f_new;
    ++stats_.accepted;
  }

  void rk4_step(double stop) {
    double h = cfg_.step;
    const double remaining = stop - t_;
    bool final = false;
    if (h >= remaining * (1.0 - 1e-12)) {
      h = remaining;
      final = true;
    }
    Eigen::VectorXd k2, k3, k4, f_new;
    eval(t_ + 0.5 * h, y_ + 0.5 * h * f_, k2);
    eval(t_ + 0.5 * h, y_ + 0.5 * h * k2, k3);
    eval(t_ + h, y_ + h * k3, k4);
    Eigen::VectorXd y_new = y_ + (h / 6.0) * (f_ + 2.0 * k2 + 2.0 * k3 + k4);
    const double t_new = final ? stop : t_ + h;
    eval(t_new, y_new, f_new);
    rcont5_ = Eigen::VectorXd::Zero(y_.size());
    accept(t_new, h, std::move(y_new), f_new);
  }

  void rk45_step(double stop) {
    Eigen::VectorXd k2, k3, k4, k5, k6, k7, y_stage;
    bool rejected_before = false;
    for (;;) {
      double h = h_;
      const double remaining = stop - t_;
      bool final = false;
      if (h >= remaining * (1.0 - 1e-12)) {
        h = remaining;
        final = true;
      }
      const Eigen::VectorXd& k1 = f_;
      eval(t_ + c2 * h, y_ + h * a21 * k1, k2);
      eval(t_ + c3 * h, y_ + h * (a31 * k1 + a32 * k2), k3);
      eval(t_ + c4 * h, y_ + h * (a41 * k1 + a42 * k2 + a43 * k3), k4);
      eval(t_ + c5 * h, y_ + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
      eval(t_ + h, y_ + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
      y_stage = y_ + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      eval(t_ + h, y_stage, k7);

      const Eigen::VectorXd err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double err = weighted_rms(err_vec, y_, y_stage);

      if (err <= 1.0) {
        const double err_clamped = std::max(err, 1e-10);
        double fac = kSafety * std::pow(err_clamped, -kAlpha) * std::pow(err_prev_, kBeta);
        fac = std::clamp(fac, kFacMin, rejected_before ? 1.0 : kFacMax);
        double h_next = std::min(h * fac, cfg_.h_max);
        // A step shortened to hit a boundary says nothing about the step size.
        if (final) h_next = std::max(h_next, std::min(h_, cfg_.h_max));
        err_prev_ = std::max(err, 1e-4);
        stats_.max_error_estimate = std::max(stats_.max_error_estimate, err);

        rcont5_ = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        accept(final ? stop : t_ + h, h, std::move(y_stage), k7);
        h_ = h_next;
        return;
      }

      ++stats_.rejected;
      rejected_before = true;
      h_ = h * std::max(kFacMin, kSafety * std::pow(err, -kAlpha));
      if (h_ < cfg_.h_min) {
        std::ostringstream msg;
        msg << "step " << h_ << " below h_min " << cfg_.h_min << " at t=" << t_ << " (error estimate " << err << ")";
        throw Error(ErrorCode::kStepUnderflow, msg.str());
      }
    }
  }

  const Flow& flow_;
  const IntegratorConfig& cfg_;
  double t_;
  Eigen::VectorXd y_;
  Eigen::VectorXd f_;
  double h_ = 0.0;
  double err_prev_ = 1e-4;
  double segment_end_ = INFINITY;

  double t_prev_ = 0.0;
  double h_last_ = 0.0;
  Eigen::VectorXd rcont1_, rcont2_, rcont3_, rcont4_, rcont5_;
  IntegratorStats stats_;
};

// Drives the stepper through a monotone sequence of sample times supplied by
// `next_sample` (returns false when done). `on_sample` returns false to stop.
template <class NextSample, class OnSample>
IntegratorStats drive(const Flow& flow, const Eigen::VectorXd& initial, double t0, double t_limit,
                      const IntegratorConfig& cfg, NextSample&& next_sample, OnSample&& on_sample) {
  Stepper stepper(flow, cfg, t0, initial);
  double tau;
  while (next_sample(tau)) {
    while (stepper.t() < tau) stepper.step(t_limit);
    const bool more = tau == stepper.t() ? on_sample(tau, stepper.y()) : on_sample(tau, stepper.interpolate(tau));
    if (!more) break;
  }
  return stepper.stats();
}

}  // namespace

void IntegratorConfig::validate() const {
  if (method == Method::kFixedRk4 && !(step > 0.0)) throw Error(ErrorCode::kInvalidConfig, "RK4 step must be > 0");
  if (method == Method::kAdaptiveRk45) {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw Error(ErrorCode::kInvalidConfig, "tolerances must be > 0");
    if (!(h_min > 0.0) || !(h_max > h_min)) throw Error(ErrorCode::kInvalidConfig, "need 0 < h_min < h_max");
  }
}

std::string to_string(Method method) { return method == Method::kFixedRk4 ? "rk4" : "rk45"; }

Method method_from_string(const std::string& name) {
  if (name == "rk4") return Method::kFixedRk4;
  if (name == "rk45") return Method::kAdaptiveRk45;
  throw Error(ErrorCode::kInvalidConfig, "unknown integrator method '" + name + "'");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kSpanEnd: return "span_end";
    case StopReason::kConverged: return "converged";
    case StopReason::kTMax: return "t_max";
  }
  return "unknown";
}

Trajectory integrate(const Flow& flow, const Eigen::VectorXd& initial, double t0, double tf,
                     const std::vector<double>& sample_times, const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(tf >= t0)) throw Error(ErrorCode::kInvalidConfig, "integration span must have tf >= t0");
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    const double s = sample_times[k];
    if (s < t0 || s > tf || (k > 0 && !(s > sample_times[k - 1]))) {
      throw Error(ErrorCode::kInvalidConfig, "sample times must be strictly increasing inside the span");
    }
  }

  Trajectory traj;
  traj.times.reserve(sample_times.size());
  traj.states.reserve(sample_times.size());
  std::size_t next = 0;
  traj.stats = drive(
      flow, initial, t0, tf, cfg,
      [&](double& tau) {
        if (next == sample_times.size()) return false;
        tau = sample_times[next++];
        return true;
      },
      [&](double tau, const Eigen::VectorXd& y) {
        traj.times.push_back(tau);
        traj.states.push_back(y);
        return true;
      });
  traj.reason = StopReason::kSpanEnd;
  return traj;
}

Trajectory integrate_to_convergence(const Flow& flow, const Eigen::VectorXd& initial, double t0,
                                    const IntegratorConfig& cfg, const StopRule& stop) {
  cfg.validate();
  if (!(stop.threshold > 0.0)) throw Error(ErrorCode::kInvalidConfig, "stop threshold must be > 0");
  if (!(stop.t_max > t0) || !(stop.sample_dt > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "stop rule needs t_max > t0 and sample_dt > 0");
  }

  Trajectory traj;
  traj.reason = StopReason::kTMax;
  long k = 0;
  bool done = false;
  traj.stats = drive(
      flow, initial, t0, stop.t_max, cfg,
      [&](double& tau) {
        if (done) return false;
        tau = std::min(t0 + static_cast<double>(k++) * stop.sample_dt, stop.t_max);
        return true;
      },
      [&](double tau, const Eigen::VectorXd& y) {
        traj.times.push_back(tau);
        traj.states.push_back(y);
        if (stop.metric(tau, y) <= stop.threshold) {
          traj.reason = StopReason::kConverged;
          done = true;
        } else if (tau >= stop.t_max) {
          traj.reason = StopReason::kTMax;
          done = true;
        }
        return !done;
      });
  return traj;
}

std::vector<double> uniform_grid(double t0, double tf, int intervals) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(intervals) + 1);
  for (int k = 0; k < intervals; ++k) grid.push_back(t0 + (tf - t0) * k / intervals);
  grid.push_back(tf);
  return grid;
}

}  // namespace intfb
