#include "intfb/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "intfb/error.hpp"
#include "intfb/random.hpp"

namespace intfb {

Problem::Problem(Graph graph, std::vector<Objective> objectives, std::vector<LinearConstraint> constraints)
    : graph_(std::move(graph)), objectives_(std::move(objectives)), constraints_(std::move(constraints)) {
  const auto m = static_cast<std::size_t>(graph_.agent_count());
  if (objectives_.size() != m || constraints_.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "expected " + std::to_string(m) + " objectives and constraints, got " +
                                                   std::to_string(objectives_.size()) + " and " +
                                                   std::to_string(constraints_.size()));
  }
  n_ = objectives_.front().dim();
  if (n_ < 1) throw Error(ErrorCode::kDimensionMismatch, "state dimension must be at least 1");
  for (std::size_t i = 0; i < m; ++i) {
    if (objectives_[i].dim() != n_ || constraints_[i].dim() != n_) {
      throw Error(ErrorCode::kDimensionMismatch, "agent " + std::to_string(i) + " has inconsistent dimension");
    }
  }
  if (!graph_.is_connected()) throw Error(ErrorCode::kDisconnectedGraph, "agent graph is not connected");
  laplacian_ = graph_.laplacian();
  kron_laplacian_ = intfb::kron_laplacian(laplacian_, n_);
}

Eigen::MatrixXd Problem::block_projector() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(stacked_dim(), stacked_dim());
  for (int i = 0; i < agent_count(); ++i) {
    const Eigen::Index at = static_cast<Eigen::Index>(i) * n_;
    p.block(at, at, n_, n_) = constraints_[static_cast<std::size_t>(i)].projector();
  }
  return p;
}

Eigen::VectorXd Problem::apply_laplacian(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(stacked_dim());
  for (int i = 0; i < agent_count(); ++i) {
    auto xi = agent(x, i);
    auto oi = agent(out, i);
    oi.setZero();
    for (int j : graph_.neighbors(i)) oi += xi - agent(x, j);
  }
  return out;
}

Eigen::VectorXd Problem::stacked_gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g(stacked_dim());
  for (int i = 0; i < agent_count(); ++i) agent(g, i) = objectives_[static_cast<std::size_t>(i)].gradient(agent(x, i));
  return g;
}

Eigen::VectorXd Problem::project(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(stacked_dim());
  for (int i = 0; i < agent_count(); ++i) {
    const auto& c = constraints_[static_cast<std::size_t>(i)];
    if (c.empty()) {
      agent(out, i) = agent(v, i);
    } else {
      agent(out, i).noalias() = c.projector() * agent(v, i);
    }
  }
  return out;
}

Eigen::VectorXd Problem::replicate(const Eigen::VectorXd& u) const { return u.replicate(agent_count(), 1); }

Eigen::VectorXd Problem::agent_sum(const Eigen::VectorXd& x) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n_);
  for (int i = 0; i < agent_count(); ++i) s += agent(x, i);
  return s;
}

Eigen::VectorXd Problem::agent_mean(const Eigen::VectorXd& x) const { return agent_sum(x) / agent_count(); }

NetworkState NetworkState::initial(Eigen::VectorXd x0) {
  NetworkState s;
  s.y = Eigen::VectorXd::Zero(x0.size());
  s.x = std::move(x0);
  return s;
}

Eigen::VectorXd NetworkState::pack() const {
  Eigen::VectorXd s(x.size() + y.size());
  s << x, y;
  return s;
}

NetworkState NetworkState::unpack(const Eigen::VectorXd& s) {
  const Eigen::Index half = s.size() / 2;
  return {s.head(half), s.tail(half)};
}

Eigen::VectorXd rhs_consensus(const Eigen::VectorXd& x, const Problem& p) { return -p.apply_laplacian(x); }

IntegralRate rhs_integral(const NetworkState& s, const Problem& p, double /*t*/) {
  IntegralRate r;
  r.dy = p.apply_laplacian(s.x);
  r.dx = -p.project(p.stacked_gradient(s.x) + r.dy + s.y);
  return r;
}

Eigen::VectorXd rhs_diminishing(const Eigen::VectorXd& x, const Problem& p, double t, const GainFn& gain) {
  const double alpha = gain(t);
  return -p.project(alpha * p.stacked_gradient(x) + p.apply_laplacian(x));
}

GainFn inverse_time_gain() {
  return [](double t) { return 1.0 / t; };
}

GainFn constant_gain(double alpha) {
  return [alpha](double) { return alpha; };
}

DisturbanceSource::DisturbanceSource(std::uint64_t seed, double lo, double hi, double hold, int n)
    : seed_(seed), lo_(lo), hi_(hi), hold_(hold), n_(n) {
  if (!(hold > 0.0)) throw Error(ErrorCode::kInvalidConfig, "disturbance hold interval must be positive");
  if (hi < lo) throw Error(ErrorCode::kInvalidConfig, "disturbance range has hi < lo");
  if (n < 1) throw Error(ErrorCode::kInvalidConfig, "disturbance dimension must be positive");
}

std::int64_t DisturbanceSource::interval(double t) const {
  auto k = static_cast<std::int64_t>(std::floor(t / hold_));
  // Division rounding can put t one interval off near a boundary.
  if (boundary(k) > t) --k;
  if (boundary(k + 1) <= t) ++k;
  return k;
}

Eigen::VectorXd DisturbanceSource::value(int agent, double t) const {
  if (lo_ == hi_) return Eigen::VectorXd::Constant(n_, lo_);
  const std::int64_t k = interval(t);
  Rng rng({seed_, static_cast<std::uint64_t>(agent), static_cast<std::uint64_t>(k)});
  return rng.uniform_vector(n_, lo_, hi_);
}

Eigen::VectorXd DisturbanceSource::stacked(int m, double t) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(m) * n_);
  for (int i = 0; i < m; ++i) v.segment(static_cast<Eigen::Index>(i) * n_, n_) = value(i, t);
  return v;
}

Flow consensus_flow(std::shared_ptr<const Problem> p) {
  Flow f;
  f.name = "consensus";
  f.dim = p->stacked_dim();
  f.rhs = [p](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) { dx = rhs_consensus(x, *p); };
  return f;
}

Flow integral_flow(std::shared_ptr<const Problem> p) {
  Flow f;
  f.name = "integral";
  f.dim = 2 * p->stacked_dim();
  f.rhs = [p](double t, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
    const Eigen::Index mn = p->stacked_dim();
    NetworkState state{s.head(mn), s.tail(mn)};
    IntegralRate r = rhs_integral(state, *p, t);
    ds.resize(2 * mn);
    ds << r.dx, r.dy;
  };
  return f;
}

Flow diminishing_flow(std::shared_ptr<const Problem> p, GainFn gain) {
  Flow f;
  f.name = "diminishing";
  f.dim = p->stacked_dim();
  f.rhs = [p, gain = std::move(gain)](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    dx = rhs_diminishing(x, *p, t, gain);
  };
  return f;
}

Flow with_disturbance(Flow base, DisturbanceSource d, int m) {
  Flow f;
  f.name = base.name + "+disturbance";
  f.dim = base.dim;
  const Eigen::Index mn = static_cast<Eigen::Index>(m) * d.dim();
  if (mn > base.dim) throw Error(ErrorCode::kDimensionMismatch, "disturbance larger than flow state");
  f.rhs = [inner = std::move(base.rhs), d, m, mn](double t, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
    inner(t, s, ds);
    ds.head(mn) += d.stacked(m, t);
  };
  auto inner_break = std::move(base.next_breakpoint);
  f.next_breakpoint = [d, inner_break](double t) {
    const double own = d.next_boundary(t);
    return inner_break ? std::min(own, inner_break(t)) : own;
  };
  return f;
}

}  // namespace intfb
