#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace intfb {

// w * ||x - c||^2, w > 0.
struct ScaledSquaredNorm {
  double weight = 1.0;
  Eigen::VectorXd center;
};

// sum_k exp(a * x[k]).
struct ExpSum {
  double coefficient = 1.0;
  int dim = 0;
};

// ||x - c||^4.
struct QuarticNorm {
  Eigen::VectorXd center;
};

// g . x
struct Linear {
  Eigen::VectorXd slope;
};

struct Zero {
  int dim = 0;
};

// One agent's convex objective. The set of forms is closed so that values,
// gradients and Hessians are all analytic.
class Objective {
 public:
  using Form = std::variant<ScaledSquaredNorm, ExpSum, QuarticNorm, Linear, Zero>;

  // Throws kInvalidConfig for a non-positive weight or negative dimension.
  explicit Objective(Form form);

  static Objective scaled_squared_norm(double weight, Eigen::VectorXd center);
  static Objective exp_sum(double coefficient, int dim);
  static Objective quartic_norm(Eigen::VectorXd center);
  static Objective linear(Eigen::VectorXd slope);
  static Objective zero(int dim);

  const Form& form() const noexcept { return form_; }
  int dim() const noexcept { return dim_; }
  std::string name() const;
  // Quadratic or affine forms; the oracle solves these in closed form.
  bool is_quadratic() const;

  // The three evaluators throw kDimensionMismatch when x.size() != dim().
  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

 private:
  void check_dim(const Eigen::VectorXd& x) const;

  Form form_;
  int dim_ = 0;
};

// Central differences, one coordinate at a time.
Eigen::VectorXd finite_diff_gradient(const Objective& f, const Eigen::VectorXd& x, double h);

// F(x) = sum_i f_i(x) and its derivatives, all evaluated at a common point.
double sum_value(const std::vector<Objective>& fs, const Eigen::VectorXd& x);
Eigen::VectorXd sum_gradient(const std::vector<Objective>& fs, const Eigen::VectorXd& x);
Eigen::MatrixXd sum_hessian(const std::vector<Objective>& fs, const Eigen::VectorXd& x);

}  // namespace intfb
