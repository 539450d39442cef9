#include "intfb/objective.hpp"

#include <cmath>
#include <string>

#include "intfb/error.hpp"

namespace intfb {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int form_dim(const Objective::Form& form) {
  return std::visit(Overloaded{
                        [](const ScaledSquaredNorm& f) { return static_cast<int>(f.center.size()); },
                        [](const ExpSum& f) { return f.dim; },
                        [](const QuarticNorm& f) { return static_cast<int>(f.center.size()); },
                        [](const Linear& f) { return static_cast<int>(f.slope.size()); },
                        [](const Zero& f) { return f.dim; },
                    },
                    form);
}

}  // namespace

Objective::Objective(Form form) : form_(std::move(form)), dim_(form_dim(form_)) {
  if (const auto* f = std::get_if<ScaledSquaredNorm>(&form_); f && !(f->weight > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "scaled squared norm needs weight > 0");
  }
  if (dim_ < 0) throw Error(ErrorCode::kInvalidConfig, "negative objective dimension");
}

Objective Objective::scaled_squared_norm(double weight, Eigen::VectorXd center) {
  return Objective(ScaledSquaredNorm{weight, std::move(center)});
}
Objective Objective::exp_sum(double coefficient, int dim) { return Objective(ExpSum{coefficient, dim}); }
Objective Objective::quartic_norm(Eigen::VectorXd center) { return Objective(QuarticNorm{std::move(center)}); }
Objective Objective::linear(Eigen::VectorXd slope) { return Objective(Linear{std::move(slope)}); }
Objective Objective::zero(int dim) { return Objective(Zero{dim}); }

std::string Objective::name() const {
  return std::visit(Overloaded{
                        [](const ScaledSquaredNorm&) { return std::string("scaled_squared_norm"); },
                        [](const ExpSum&) { return std::string("exp_sum"); },
                        [](const QuarticNorm&) { return std::string("quartic_norm"); },
                        [](const Linear&) { return std::string("linear"); },
                        [](const Zero&) { return std::string("zero"); },
                    },
                    form_);
}

bool Objective::is_quadratic() const {
  return std::holds_alternative<ScaledSquaredNorm>(form_) || std::holds_alternative<Linear>(form_) ||
         std::holds_alternative<Zero>(form_);
}

void Objective::check_dim(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                name() + " expects dimension " + std::to_string(dim_) + ", got " + std::to_string(x.size()));
  }
}

double Objective::value(const Eigen::VectorXd& x) const {
  check_dim(x);
  return std::visit(Overloaded{
                        [&](const ScaledSquaredNorm& f) { return f.weight * (x - f.center).squaredNorm(); },
                        [&](const ExpSum& f) { return (f.coefficient * x.array()).exp().sum(); },
                        [&](const QuarticNorm& f) {
                          const double r2 = (x - f.center).squaredNorm();
                          return r2 * r2;
                        },
                        [&](const Linear& f) { return f.slope.dot(x); },
                        [](const Zero&) { return 0.0; },
                    },
                    form_);
}

Eigen::VectorXd Objective::gradient(const Eigen::VectorXd& x) const {
  check_dim(x);
  return std::visit(Overloaded{
                        [&](const ScaledSquaredNorm& f) -> Eigen::VectorXd { return 2.0 * f.weight * (x - f.center); },
                        [&](const ExpSum& f) -> Eigen::VectorXd {
                          return f.coefficient * (f.coefficient * x.array()).exp().matrix();
                        },
                        [&](const QuarticNorm& f) -> Eigen::VectorXd {
                          const Eigen::VectorXd d = x - f.center;
                          return 4.0 * d.squaredNorm() * d;
                        },
                        [](const Linear& f) -> Eigen::VectorXd { return f.slope; },
                        [](const Zero& f) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(f.dim); },
                    },
                    form_);
}

Eigen::MatrixXd Objective::hessian(const Eigen::VectorXd& x) const {
  check_dim(x);
  const Eigen::Index n = dim_;
  return std::visit(Overloaded{
                        [&](const ScaledSquaredNorm& f) -> Eigen::MatrixXd {
                          return 2.0 * f.weight * Eigen::MatrixXd::Identity(n, n);
                        },
                        [&](const ExpSum& f) -> Eigen::MatrixXd {
                          const double a = f.coefficient;
                          return (a * a * (a * x.array()).exp()).matrix().asDiagonal();
                        },
                        [&](const QuarticNorm& f) -> Eigen::MatrixXd {
                          const Eigen::VectorXd d = x - f.center;
                          return 4.0 * d.squaredNorm() * Eigen::MatrixXd::Identity(n, n) + 8.0 * d * d.transpose();
                        },
                        [&](const Linear&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Zero(n, n); },
                        [&](const Zero&) -> Eigen::MatrixXd { return Eigen::MatrixXd::Zero(n, n); },
                    },
                    form_);
}

Eigen::VectorXd finite_diff_gradient(const Objective& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double up = f.value(probe);
    probe[k] = x[k] - h;
    const double down = f.value(probe);
    probe[k] = x[k];
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

double sum_value(const std::vector<Objective>& fs, const Eigen::VectorXd& x) {
  double total = 0.0;
  for (const auto& f : fs) total += f.value(x);
  return total;
}

Eigen::VectorXd sum_gradient(const std::vector<Objective>& fs, const Eigen::VectorXd& x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (const auto& f : fs) g += f.gradient(x);
  return g;
}

Eigen::MatrixXd sum_hessian(const std::vector<Objective>& fs, const Eigen::VectorXd& x) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(x.size(), x.size());
  for (const auto& f : fs) h += f.hessian(x);
  return h;
}

}  // namespace intfb
