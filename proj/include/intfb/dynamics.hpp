#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "intfb/constraint.hpp"
#include "intfb/graph.hpp"
#include "intfb/objective.hpp"

namespace intfb {

// One distributed optimization instance: graph, per-agent objectives and
// per-agent constraints, all in dimension n. Stacked vectors are laid out as
// col{x_1, ..., x_m}.
class Problem {
 public:
  // Throws kDimensionMismatch on inconsistent counts or dimensions and
  // kDisconnectedGraph when the graph has more than one component.
  Problem(Graph graph, std::vector<Objective> objectives, std::vector<LinearConstraint> constraints);

  int agent_count() const noexcept { return graph_.agent_count(); }
  int dim() const noexcept { return n_; }
  Eigen::Index stacked_dim() const noexcept { return static_cast<Eigen::Index>(agent_count()) * n_; }

  const Graph& graph() const noexcept { return graph_; }
  const std::vector<Objective>& objectives() const noexcept { return objectives_; }
  const std::vector<LinearConstraint>& constraints() const noexcept { return constraints_; }
  const Eigen::MatrixXd& laplacian() const noexcept { return laplacian_; }
  // L (x) I_n, dense.
  const Eigen::MatrixXd& kron_laplacian() const noexcept { return kron_laplacian_; }
  // blockdiag(P_1, ..., P_m), dense.
  Eigen::MatrixXd block_projector() const;

  auto agent(const Eigen::VectorXd& stacked, int i) const { return stacked.segment(static_cast<Eigen::Index>(i) * n_, n_); }
  auto agent(Eigen::VectorXd& stacked, int i) const { return stacked.segment(static_cast<Eigen::Index>(i) * n_, n_); }

  // (L (x) I_n) x evaluated through neighbor lists.
  Eigen::VectorXd apply_laplacian(const Eigen::VectorXd& x) const;
  // col{grad f_1(x_1), ..., grad f_m(x_m)}.
  Eigen::VectorXd stacked_gradient(const Eigen::VectorXd& x) const;
  // P_bar v.
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;
  // 1_m (x) u.
  Eigen::VectorXd replicate(const Eigen::VectorXd& u) const;
  // Mean of the agent blocks.
  Eigen::VectorXd agent_mean(const Eigen::VectorXd& x) const;
  // Sum of the agent blocks.
  Eigen::VectorXd agent_sum(const Eigen::VectorXd& x) const;

 private:
  Graph graph_;
  std::vector<Objective> objectives_;
  std::vector<LinearConstraint> constraints_;
  int n_ = 0;
  Eigen::MatrixXd laplacian_;
  Eigen::MatrixXd kron_laplacian_;
};

// Stacked primal state x and integral state y.
struct NetworkState {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  // y(0) = 0.
  static NetworkState initial(Eigen::VectorXd x0);
  // [x; y] as one vector, the layout used by the integral flow.
  Eigen::VectorXd pack() const;
  static NetworkState unpack(const Eigen::VectorXd& s);
};

struct IntegralRate {
  Eigen::VectorXd dx;
  Eigen::VectorXd dy;
};

using GainFn = std::function<double(double)>;

// -L_bar x.
Eigen::VectorXd rhs_consensus(const Eigen::VectorXd& x, const Problem& p);
// dx = -P_bar(grad f(x) + L_bar x + y), dy = L_bar x.
IntegralRate rhs_integral(const NetworkState& s, const Problem& p, double t);
// Per agent: -P_i(alpha(t) grad f_i(x_i) + sum_{j in N_i}(x_i - x_j)).
Eigen::VectorXd rhs_diminishing(const Eigen::VectorXd& x, const Problem& p, double t, const GainFn& gain);

// alpha(t) = 1/t.
GainFn inverse_time_gain();
GainFn constant_gain(double alpha);

// Bounded, piecewise-constant per-agent disturbance. Each entry is uniform in
// [lo, hi] and held for `hold` seconds; the sample on [k*hold, (k+1)*hold) is
// a pure function of (seed, agent, k).
class DisturbanceSource {
 public:
  DisturbanceSource(std::uint64_t seed, double lo, double hi, double hold, int n);

  std::uint64_t seed() const noexcept { return seed_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double hold() const noexcept { return hold_; }
  int dim() const noexcept { return n_; }

  // Hold-interval index of t, consistent with boundary(k) at exact boundaries.
  std::int64_t interval(double t) const;
  double boundary(std::int64_t k) const { return static_cast<double>(k) * hold_; }
  // First boundary strictly after t.
  double next_boundary(double t) const { return boundary(interval(t) + 1); }

  Eigen::VectorXd value(int agent, double t) const;
  Eigen::VectorXd stacked(int m, double t) const;

 private:
  std::uint64_t seed_;
  double lo_;
  double hi_;
  double hold_;
  int n_;
};

using RhsFn = std::function<void(double t, const Eigen::VectorXd& s, Eigen::VectorXd& ds)>;

// A right-hand side on a flat state vector. When `next_breakpoint` is set,
// the flow is only piecewise smooth; it returns the first discontinuity
// strictly after t.
struct Flow {
  std::string name;
  Eigen::Index dim = 0;
  RhsFn rhs;
  std::function<double(double)> next_breakpoint;
};

// State layouts: consensus and diminishing flows act on x (mn entries); the
// integral flow acts on [x; y] (2mn entries).
Flow consensus_flow(std::shared_ptr<const Problem> p);
Flow integral_flow(std::shared_ptr<const Problem> p);
Flow diminishing_flow(std::shared_ptr<const Problem> p, GainFn gain);
// Adds v(t) to the x-part of the rate, outside any projection.
Flow with_disturbance(Flow base, DisturbanceSource d, int m);

}  // namespace intfb
