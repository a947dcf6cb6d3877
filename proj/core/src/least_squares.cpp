#include "skillspace/least_squares.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

namespace skillspace {

Eigen::MatrixXd numerical_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd xp = x;
  Eigen::MatrixXd jac;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    const Eigen::VectorXd fp = f(xp);
    xp[i] = x[i] - step;
    const Eigen::VectorXd fm = f(xp);
    xp[i] = x[i];
    if (i == 0) jac.resize(fp.size(), x.size());
    jac.col(i) = (fp - fm) / (2.0 * step);
  }
  return jac;
}

LeastSquaresReport levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd x0,
                                       const LeastSquaresOptions& options, const Retraction& retract) {
  LeastSquaresReport report;
  if (retract) retract(x0);
  report.x = x0;
  Eigen::VectorXd r = f(x0);
  double cost = 0.5 * r.squaredNorm();
  report.initial_cost = report.final_cost = cost;
  report.cost_history.push_back(cost);

  if (x0.size() == 0 || cost <= options.cost_tolerance) {
    report.converged = true;
    return report;
  }

  Eigen::VectorXd x = x0;
  Eigen::MatrixXd jac = numerical_jacobian(f, x, options.finite_difference_step);
  Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::VectorXd g = jac.transpose() * r;
  double mu = options.initial_damping * std::max(jtj.diagonal().maxCoeff(), 1e-300);
  double nu = 2.0;

  for (int it = 0; it < options.max_iterations; ++it) {
    report.iterations = it + 1;
    if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      report.converged = true;
      break;
    }
    Eigen::MatrixXd a = jtj;
    a.diagonal().array() += mu;
    const Eigen::VectorXd step = a.ldlt().solve(-g);
    if (!step.allFinite()) break;
    if (step.norm() <= options.step_tolerance * (x.norm() + options.step_tolerance)) {
      report.converged = true;
      break;
    }

    Eigen::VectorXd candidate = x + step;
    if (retract) retract(candidate);
    const Eigen::VectorXd r_new = f(candidate);
    const double cost_new = 0.5 * r_new.squaredNorm();
    const double predicted = 0.5 * step.dot(mu * step - g);
    const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : -1.0;

    if (std::isfinite(cost_new) && cost_new < cost) {
      const double relative_drop = (cost - cost_new) / cost;
      x = candidate;
      r = r_new;
      cost = cost_new;
      report.cost_history.push_back(cost);
      if (cost <= options.cost_tolerance || relative_drop < 1e-15) {
        report.converged = true;
        break;
      }
      jac = numerical_jacobian(f, x, options.finite_difference_step);
      jtj = jac.transpose() * jac;
      g = jac.transpose() * r;
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu) || mu > 1e300) {
        report.converged = true;  // no descent direction left at machine precision
        break;
      }
    }
  }
  report.x = x;
  report.final_cost = cost;
  return report;
}

}  // namespace skillspace
