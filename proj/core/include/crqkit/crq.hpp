#pragma once

#include <Eigen/Dense>

#include <vector>

namespace crqkit {

// Orthant-enumeration cap: 2^q linear programs are solved per fit.
inline constexpr int kMaxCrqResponses = 12;

struct CrqProblem {
  Eigen::MatrixXd x_matrix;  // N x p, may include intercept and dummies
  Eigen::MatrixXd y_matrix;  // N x q
  double tau = 0.5;
};

struct CrqFit {
  Eigen::VectorXd alpha;          // q, sum_j |alpha_j| = 1
  Eigen::VectorXd beta;           // p
  double objective = 0.0;         // sum_i w_i * rho_tau(x_i'beta - y_i'alpha)
  std::vector<int> sign_pattern;  // +1/-1 per response: the orthant searched
  double tau = 0.5;
};

// First canonical regression quantile pair: the global minimizer of
// sum_i rho_tau(x_i'beta - y_i'alpha) subject to sum_j |alpha_j| = 1,
// found by solving one LP per sign orthant of alpha and keeping the best.
// Equal objectives resolve to the lexicographically smallest sign pattern
// (+1 before -1).
CrqFit fit_crq(const CrqProblem& problem);
CrqFit fit_crq(const CrqProblem& problem, const Eigen::VectorXd& weights);

// Single-orthant solve: alpha restricted to sign_j * alpha_j >= 0 with
// sum_j sign_j * alpha_j = 1.
CrqFit fit_crq_orthant(const CrqProblem& problem, const std::vector<int>& signs);
CrqFit fit_crq_orthant(const CrqProblem& problem, const std::vector<int>& signs,
                       const Eigen::VectorXd& weights);

// Pure evaluation of the objective at given coefficients; no optimization.
double crq_objective(const CrqProblem& problem, const Eigen::VectorXd& alpha,
                     const Eigen::VectorXd& beta);

}  // namespace crqkit
