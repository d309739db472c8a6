#include "crqkit/crq.hpp"

#include <cmath>
#include <string>

#include "crqkit/errors.hpp"
#include "crqkit/simplex.hpp"

namespace crqkit {

namespace {

double check_loss_unchecked(double u, double tau) {
  return u >= 0.0 ? tau * u : (tau - 1.0) * u;
}

void validate(const CrqProblem& problem, const Eigen::VectorXd& weights) {
  const int n = static_cast<int>(problem.x_matrix.rows());
  const int p = static_cast<int>(problem.x_matrix.cols());
  const int q = static_cast<int>(problem.y_matrix.cols());
  if (!std::isfinite(problem.tau) || problem.tau <= 0.0 || problem.tau >= 1.0) {
    throw DomainError("tau must lie in the open interval (0, 1)");
  }
  if (q < 1) throw DomainError("at least one response column required");
  if (problem.y_matrix.rows() != n) throw DomainError("x and y row counts differ");
  if (n <= p + q) {
    throw DomainError("need N > p + q observations: N=" + std::to_string(n) +
                      ", p=" + std::to_string(p) + ", q=" + std::to_string(q));
  }
  if (!problem.x_matrix.allFinite() || !problem.y_matrix.allFinite()) {
    throw DomainError("x and y must be finite");
  }
  if (weights.size() != n) throw DomainError("one weight per observation required");
  if (!weights.allFinite() || (weights.array() < 0.0).any()) {
    throw DomainError("weights must be finite and nonnegative");
  }
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(problem.x_matrix);
    if (qr.rank() < p) throw RankError("x matrix is rank deficient");
  }
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(problem.y_matrix);
    if (qr.rank() < q) throw RankError("y matrix is rank deficient");
  }
}

CrqFit solve_orthant(const CrqProblem& problem, const std::vector<int>& signs,
                     const Eigen::VectorXd& weights) {
  const Eigen::MatrixXd& x = problem.x_matrix;
  const Eigen::MatrixXd& y = problem.y_matrix;
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const int q = static_cast<int>(y.cols());
  const double tau = problem.tau;

  // Minimize the check loss of x_i'beta - sum_j sign_j y_ij a_j over a >= 0
  // with sum_j a_j = 1 and alpha_j = sign_j a_j. The first a is eliminated
  // through the normalization (a_0 = 1 - sum_rest - handled by the slack t),
  // which puts sign_0 y_i0 on the right-hand side: the solver then starts
  // from the feasible, nondegenerate vertex (beta = 0, alpha = sign_0 e_0)
  // with no artificial variables and no fully degenerate corner to escape.
  //
  // Variables: [beta+ (p) | beta- (p) | a_1..a_{q-1} | u (n) | v (n) | t].
  const double s0 = static_cast<double>(signs[0]);
  const int nv = 2 * p + (q - 1) + 2 * n + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, nv);
  Eigen::VectorXd b(n + 1);
  a.block(0, 0, n, p) = x;
  a.block(0, p, n, p) = -x;
  for (int j = 1; j < q; ++j) {
    const double sj = static_cast<double>(signs[static_cast<std::size_t>(j)]);
    a.block(0, 2 * p + (j - 1), n, 1) = s0 * y.col(0) - sj * y.col(j);
  }
  for (int i = 0; i < n; ++i) {
    a(i, 2 * p + (q - 1) + i) = -1.0;
    a(i, 2 * p + (q - 1) + n + i) = 1.0;
    b(i) = s0 * y(i, 0);
  }
  for (int j = 1; j < q; ++j) a(n, 2 * p + (j - 1)) = 1.0;
  a(n, nv - 1) = 1.0;  // slack t = a_0 >= 0
  b(n) = 1.0;

  Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);
  for (int i = 0; i < n; ++i) {
    c(2 * p + (q - 1) + i) = tau * weights(i);
    c(2 * p + (q - 1) + n + i) = (1.0 - tau) * weights(i);
  }

  const LpSolution lp = solve_lp(a, b, c);
  if (lp.status != LpStatus::optimal) {
    throw SolverError("canonical regression quantile LP did not reach an optimum (status " +
                      std::to_string(static_cast<int>(lp.status)) + ")");
  }

  CrqFit fit;
  fit.beta = lp.x.head(p) - lp.x.segment(p, p);
  fit.alpha = Eigen::VectorXd(q);
  double rest = 0.0;
  for (int j = 1; j < q; ++j) {
    const double aj = lp.x(2 * p + (j - 1));
    fit.alpha(j) = static_cast<double>(signs[static_cast<std::size_t>(j)]) * aj;
    rest += aj;
  }
  fit.alpha(0) = s0 * (1.0 - rest);
  fit.sign_pattern = signs;
  fit.tau = tau;
  const Eigen::VectorXd resid = x * fit.beta - y * fit.alpha;
  fit.objective = 0.0;
  for (int i = 0; i < n; ++i) {
    fit.objective += weights(i) * check_loss_unchecked(resid(i), tau);
  }
  return fit;
}

}  // namespace

CrqFit fit_crq_orthant(const CrqProblem& problem, const std::vector<int>& signs) {
  return fit_crq_orthant(problem, signs, Eigen::VectorXd::Ones(problem.x_matrix.rows()));
}

CrqFit fit_crq_orthant(const CrqProblem& problem, const std::vector<int>& signs,
                       const Eigen::VectorXd& weights) {
  validate(problem, weights);
  const int q = static_cast<int>(problem.y_matrix.cols());
  if (static_cast<int>(signs.size()) != q) throw DomainError("one sign per response required");
  for (int s : signs) {
    if (s != 1 && s != -1) throw DomainError("sign pattern entries must be +1 or -1");
  }
  return solve_orthant(problem, signs, weights);
}

CrqFit fit_crq(const CrqProblem& problem) {
  return fit_crq(problem, Eigen::VectorXd::Ones(problem.x_matrix.rows()));
}

CrqFit fit_crq(const CrqProblem& problem, const Eigen::VectorXd& weights) {
  validate(problem, weights);
  const int q = static_cast<int>(problem.y_matrix.cols());
  if (q > kMaxCrqResponses) {
    throw DomainError("orthant enumeration is capped at " + std::to_string(kMaxCrqResponses) +
                      " responses, got " + std::to_string(q));
  }

  // Sign patterns in lexicographic order (+1 before -1). Improvement must
  // clear a tolerance so objective ties, exact in the mirrored tau = .5
  // orthants up to roundoff, resolve to the smallest pattern.
  CrqFit best;
  bool have_best = false;
  const unsigned long patterns = 1ul << q;
  std::vector<int> signs(static_cast<std::size_t>(q), 1);
  for (unsigned long mask = 0; mask < patterns; ++mask) {
    for (int j = 0; j < q; ++j) {
      signs[static_cast<std::size_t>(j)] = (mask >> (q - 1 - j)) & 1ul ? -1 : 1;
    }
    CrqFit fit = solve_orthant(problem, signs, weights);
    if (!have_best || fit.objective < best.objective - 1e-12 * (1.0 + best.objective)) {
      best = std::move(fit);
      have_best = true;
    }
  }
  return best;
}

double crq_objective(const CrqProblem& problem, const Eigen::VectorXd& alpha,
                     const Eigen::VectorXd& beta) {
  if (!std::isfinite(problem.tau) || problem.tau <= 0.0 || problem.tau >= 1.0) {
    throw DomainError("tau must lie in the open interval (0, 1)");
  }
  if (alpha.size() != problem.y_matrix.cols()) throw DomainError("alpha length must match response count");
  if (beta.size() != problem.x_matrix.cols()) throw DomainError("beta length must match design column count");
  if (problem.x_matrix.rows() != problem.y_matrix.rows()) throw DomainError("x and y row counts differ");
  if (!alpha.allFinite() || !beta.allFinite()) throw DomainError("coefficients must be finite");

  double total = 0.0;
  const int n = static_cast<int>(problem.x_matrix.rows());
  for (int i = 0; i < n; ++i) {
    const double r = problem.x_matrix.row(i).dot(beta) - problem.y_matrix.row(i).dot(alpha);
    total += check_loss_unchecked(r, problem.tau);
  }
  return total;
}

}  // namespace crqkit
