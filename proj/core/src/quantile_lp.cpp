#include "crqkit/quantile_lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "crqkit/errors.hpp"
#include "crqkit/simplex.hpp"

namespace crqkit {

namespace {

void require_tau(double tau) {
  if (!std::isfinite(tau) || tau <= 0.0 || tau >= 1.0) {
    throw DomainError("tau must lie in the open interval (0, 1)");
  }
}

double check_loss_unchecked(double u, double tau) {
  return u >= 0.0 ? tau * u : (tau - 1.0) * u;
}

}  // namespace

double check_loss(double u, double tau) {
  require_tau(tau);
  if (!std::isfinite(u)) throw DomainError("check_loss requires a finite argument");
  return check_loss_unchecked(u, tau);
}

double sample_quantile(std::span<const double> xs, double tau) {
  require_tau(tau);
  if (xs.empty()) throw DomainError("sample_quantile requires a nonempty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  for (double x : sorted) {
    if (!std::isfinite(x)) throw DomainError("sample_quantile requires finite values");
  }
  std::sort(sorted.begin(), sorted.end());

  // The minimizing set of sum rho_tau(x_i - theta) is the single order
  // statistic x_(ceil(n tau)) unless n*tau is an integer k, in which case it
  // is the interval [x_(k), x_(k+1)] and we take the lower endpoint.
  const double k = static_cast<double>(sorted.size()) * tau;
  const double rounded = std::round(k);
  std::size_t index;
  if (std::abs(k - rounded) <= 1e-9 * std::max(1.0, k)) {
    index = static_cast<std::size_t>(rounded);
  } else {
    index = static_cast<std::size_t>(std::ceil(k));
  }
  index = std::clamp<std::size_t>(index, 1, sorted.size());
  return sorted[index - 1];
}

QrFit fit_quantile_regression(const QrProblem& problem) {
  return fit_quantile_regression(problem, Eigen::VectorXd::Ones(problem.design.rows()));
}

QrFit fit_quantile_regression(const QrProblem& problem, const Eigen::VectorXd& weights) {
  const Eigen::MatrixXd& x = problem.design;
  const Eigen::VectorXd& y = problem.response;
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const double tau = problem.tau;

  require_tau(tau);
  if (n < 1 || p < 1) throw DomainError("design must have at least one row and one column");
  if (y.size() != n) throw DomainError("design and response row counts differ");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("design and response must be finite");
  if (weights.size() != n) throw DomainError("one weight per observation required");
  if (!weights.allFinite() || (weights.array() < 0.0).any()) {
    throw DomainError("weights must be finite and nonnegative");
  }
  if (n <= p) {
    throw InsufficientDataError("need more observations than coefficients: N=" +
                                std::to_string(n) + ", p=" + std::to_string(p));
  }
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p) throw RankError("design matrix is rank deficient");
  }

  // Variables [beta+ | beta- | u | v]; each residual row carries a unit
  // u/v column, so the solver starts from a feasible crash basis.
  const int nv = 2 * p + 2 * n;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, nv);
  a.block(0, 0, n, p) = x;
  a.block(0, p, n, p) = -x;
  for (int i = 0; i < n; ++i) {
    a(i, 2 * p + i) = 1.0;
    a(i, 2 * p + n + i) = -1.0;
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);
  for (int i = 0; i < n; ++i) {
    c(2 * p + i) = tau * weights(i);
    c(2 * p + n + i) = (1.0 - tau) * weights(i);
  }

  const LpSolution lp = solve_lp(a, y, c);
  if (lp.status != LpStatus::optimal) {
    throw SolverError("quantile regression LP did not reach an optimum (status " +
                      std::to_string(static_cast<int>(lp.status)) + ")");
  }

  QrFit fit;
  fit.coefficients = lp.x.head(p) - lp.x.segment(p, p);
  fit.residuals = y - x * fit.coefficients;
  fit.objective = 0.0;
  for (int i = 0; i < n; ++i) {
    fit.objective += weights(i) * check_loss_unchecked(fit.residuals(i), tau);
  }
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  for (int i = 0; i < n && static_cast<int>(fit.vertex_basis.size()) < p; ++i) {
    if (std::abs(fit.residuals(i)) <= 1e-9 * scale) fit.vertex_basis.push_back(i);
  }
  return fit;
}

}  // namespace crqkit
