#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace skillspace {

struct LeastSquaresOptions {
  int max_iterations = 200;
  double finite_difference_step = 1e-6;  // central differences
  double step_tolerance = 1e-15;
  double gradient_tolerance = 1e-16;
  double cost_tolerance = 1e-30;  // absolute; stop once 0.5*|r|^2 falls below
  double initial_damping = 1e-3;  // relative to max diag(J^T J)
};

struct LeastSquaresReport {
  Eigen::VectorXd x;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Cost after each accepted step, starting with the initial cost.
  std::vector<double> cost_history;
};

using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
/// Maps an updated parameter vector back onto its constraint set (e.g. renormalizes
/// unit-vector blocks). Applied after every step.
using Retraction = std::function<void(Eigen::VectorXd&)>;

Eigen::MatrixXd numerical_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x, double step);

/// Levenberg-Marquardt minimization of 0.5*|f(x)|^2 with numerical Jacobians.
/// Accepted steps never increase the cost.
LeastSquaresReport levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd x0,
                                       const LeastSquaresOptions& options = {}, const Retraction& retract = {});

}  // namespace skillspace
