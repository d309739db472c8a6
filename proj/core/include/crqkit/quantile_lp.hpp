#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace crqkit {

// Asymmetric absolute loss rho_tau(u) = u * (tau - 1{u < 0}).
double check_loss(double u, double tau);

// Minimizer of sum_i rho_tau(x_i - theta). When the minimizing set is an
// interval, returns its lower endpoint (order-statistic convention).
double sample_quantile(std::span<const double> xs, double tau);

struct QrProblem {
  Eigen::MatrixXd design;    // N x p, full column rank
  Eigen::VectorXd response;  // N
  double tau = 0.5;
};

struct QrFit {
  Eigen::VectorXd coefficients;  // p
  double objective = 0.0;        // sum_i w_i * rho_tau(residual_i)
  Eigen::VectorXd residuals;     // response - design * coefficients
  std::vector<int> vertex_basis; // p interpolated observation indices
};

// Exact vertex solution of  min_beta sum_i rho_tau(y_i - x_i' beta)  via the
// LP  min tau*sum(u) + (1-tau)*sum(v)  s.t.  y = X beta + u - v, u,v >= 0.
QrFit fit_quantile_regression(const QrProblem& problem);

// Weighted variant: minimizes sum_i w_i * rho_tau(y_i - x_i' beta).
// Weights must be nonnegative and finite; used by the bootstrap.
QrFit fit_quantile_regression(const QrProblem& problem, const Eigen::VectorXd& weights);

}  // namespace crqkit
