#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "crqkit/crq.hpp"
#include "crqkit/errors.hpp"
#include "crqkit/quantile_lp.hpp"
#include "crqkit/rng.hpp"
#include "crqkit/synth.hpp"

using namespace crqkit;

namespace {

double rel_close(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

CrqProblem random_problem(rng::Stream& s, int n, int p, int q, double tau = 0.5) {
  CrqProblem problem;
  problem.x_matrix = Eigen::MatrixXd(n, p);
  problem.x_matrix.col(0).setOnes();
  for (int j = 1; j < p; ++j) {
    for (int i = 0; i < n; ++i) problem.x_matrix(i, j) = s.next_gaussian();
  }
  problem.y_matrix = Eigen::MatrixXd(n, q);
  for (int j = 0; j < q; ++j) {
    for (int i = 0; i < n; ++i) problem.y_matrix(i, j) = s.next_gaussian();
  }
  problem.tau = tau;
  return problem;
}

// Straight re-summation, kept apart from the library's evaluation path.
double resummed_objective(const CrqProblem& problem, const Eigen::VectorXd& alpha,
                          const Eigen::VectorXd& beta) {
  double total = 0.0;
  for (int i = 0; i < problem.x_matrix.rows(); ++i) {
    const double r = problem.x_matrix.row(i).dot(beta) - problem.y_matrix.row(i).dot(alpha);
    total += check_loss(r, problem.tau);
  }
  return total;
}

}  // namespace

TEST_CASE("single response reproducing an exact linear relation") {
  rng::Stream s(3);
  const int n = 12;
  Eigen::MatrixXd x(n, 2);
  x.col(0).setOnes();
  for (int i = 0; i < n; ++i) x(i, 1) = s.next_gaussian();
  Eigen::VectorXd c(2);
  c << 0.7, -1.3;
  CrqProblem problem{x, x * c, 0.5};

  const CrqFit fit = fit_crq(problem);
  CHECK(fit.objective == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(std::abs(fit.alpha(0)) == doctest::Approx(1.0).epsilon(1e-9));
  // Ties at zero objective resolve to the all-positive orthant.
  CHECK(fit.alpha(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.beta(0) == doctest::Approx(c(0)).epsilon(1e-7));
  CHECK(fit.beta(1) == doctest::Approx(c(1)).epsilon(1e-7));
}

TEST_CASE("signal column dominates a pure-noise column") {
  rng::Stream s(5);
  const int n = 40;
  Eigen::MatrixXd x(n, 2);
  x.col(0).setOnes();
  for (int i = 0; i < n; ++i) x(i, 1) = s.next_gaussian();
  Eigen::VectorXd c(2);
  c << 0.4, 1.1;
  Eigen::MatrixXd y(n, 2);
  y.col(0) = x * c;
  for (int i = 0; i < n; ++i) y(i, 1) = 25.0 * s.next_gaussian();
  CrqProblem problem{x, y, 0.5};

  const CrqFit fit = fit_crq(problem);
  CHECK(fit.objective == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(std::abs(fit.alpha(0)) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std::abs(fit.alpha(1)) < 1e-7);

  const CrqFit oracle = grid_search_crq(problem, 1e-2);
  CHECK(fit.objective <= oracle.objective + 1e-9);
}

TEST_CASE("alpha satisfies the absolute-sum normalization") {
  rng::Stream s(9);
  for (int rep = 0; rep < 10; ++rep) {
    const CrqProblem problem = random_problem(s, 20, 2, 3);
    const CrqFit fit = fit_crq(problem);
    CHECK(std::abs(fit.alpha.cwiseAbs().sum() - 1.0) < 1e-8);
    for (int j = 0; j < 3; ++j) {
      const double a = fit.alpha(j);
      const int sign = fit.sign_pattern[static_cast<std::size_t>(j)];
      CHECK((a == 0.0 || (a > 0) == (sign > 0)));
    }
  }
}

TEST_CASE("objective evaluation matches independent re-summation") {
  rng::Stream s(13);
  for (int rep = 0; rep < 10; ++rep) {
    const CrqProblem problem = random_problem(s, 15, 2, 2, rep % 2 ? 0.5 : 0.3);
    Eigen::VectorXd alpha(2);
    alpha << s.next_gaussian(), s.next_gaussian();
    alpha /= alpha.cwiseAbs().sum();
    Eigen::VectorXd beta(2);
    beta << s.next_gaussian(), s.next_gaussian();
    CHECK(crq_objective(problem, alpha, beta) ==
          doctest::Approx(resummed_objective(problem, alpha, beta)).epsilon(1e-12));
  }

  CrqProblem one = random_problem(s, 8, 2, 1);
  Eigen::VectorXd alpha1 = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(2);
  one.y_matrix.setZero();
  one.x_matrix.col(1).setZero();
  one.x_matrix.col(1)(0) = 1.0;  // keep full rank
  Eigen::VectorXd beta(2);
  beta << 2.0, 0.0;
  one.y_matrix.col(0).setZero();
  // single nonzero residual of 2 at tau = .5 scores 1
  CrqProblem tiny{Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Zero(1, 1), 0.5};
  Eigen::VectorXd a1(1), b1(1);
  a1 << 1.0;
  b1 << 2.0;
  CHECK(crq_objective(tiny, a1, b1) == doctest::Approx(1.0));
  CHECK(crq_objective(tiny, a1, Eigen::VectorXd::Zero(1)) == doctest::Approx(0.0));
}

TEST_CASE("fit is globally better than random normalized coefficients") {
  rng::Stream s(17);
  const CrqProblem problem = random_problem(s, 25, 3, 2);
  const CrqFit fit = fit_crq(problem);
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::VectorXd alpha(2);
    alpha << s.next_gaussian(), s.next_gaussian();
    alpha /= alpha.cwiseAbs().sum();
    Eigen::VectorXd beta(3);
    beta << s.next_gaussian(), s.next_gaussian(), s.next_gaussian();
    CHECK(crq_objective(problem, alpha, beta) >= fit.objective - 1e-10);
  }
}

TEST_CASE("grid oracle agreement on small instances") {
  rng::Stream s(21);
  for (int rep = 0; rep < 8; ++rep) {
    const CrqProblem problem = random_problem(s, 15, 2, 2);
    const CrqFit fit = fit_crq(problem);
    const CrqFit oracle = grid_search_crq(problem, 1e-2);
    // The grid restricts alpha to its lattice, so it bounds the fit from
    // above; the gap stays small because beta is solved exactly per point.
    CHECK(fit.objective <= oracle.objective + 1e-9);
    CHECK(oracle.objective - fit.objective <= 0.05 * std::max(1.0, fit.objective));
  }
}

TEST_CASE("response rescaling: homogeneity bound and consistency") {
  // Rescaling one response column maps the old optimum to a feasible point
  // of the new problem with objective f*/s. That point bounds the refit
  // from above; the refit may be strictly better because the absolute-sum
  // normalization does not commute with per-column scaling.
  rng::Stream s(29);
  for (double c : {0.1, 10.0}) {
    const CrqProblem problem = random_problem(s, 18, 2, 2);
    const CrqFit base = fit_crq(problem);

    CrqProblem scaled = problem;
    scaled.y_matrix.col(0) *= c;
    const CrqFit refit = fit_crq(scaled);

    Eigen::VectorXd adjusted = base.alpha;
    adjusted(0) /= c;
    const double norm = adjusted.cwiseAbs().sum();
    const Eigen::VectorXd mapped_alpha = adjusted / norm;
    const Eigen::VectorXd mapped_beta = base.beta / norm;
    const double mapped_objective = base.objective / norm;

    CHECK(crq_objective(scaled, mapped_alpha, mapped_beta) ==
          doctest::Approx(mapped_objective).epsilon(1e-9));
    CHECK(std::abs(mapped_alpha.cwiseAbs().sum() - 1.0) < 1e-12);
    CHECK(refit.objective <= mapped_objective + 1e-9 * (1.0 + mapped_objective));
  }
}

TEST_CASE("joint rescaling of all responses is exactly equivariant") {
  rng::Stream s(47);
  for (double c : {0.1, 10.0}) {
    const CrqProblem problem = random_problem(s, 18, 2, 2);
    const CrqFit base = fit_crq(problem);

    CrqProblem scaled = problem;
    scaled.y_matrix *= c;
    const CrqFit refit = fit_crq(scaled);

    // All columns scaled by c: alpha is unchanged, beta and the objective
    // scale by c (the normalization set maps onto itself).
    CHECK(rel_close(refit.objective, c * base.objective) < 1e-6);
    for (int j = 0; j < 2; ++j) {
      CHECK(refit.alpha(j) == doctest::Approx(base.alpha(j)).epsilon(1e-6));
      CHECK(refit.beta(j) == doctest::Approx(c * base.beta(j)).epsilon(1e-6));
    }
  }
}

TEST_CASE("positive-orthant single response equals quantile regression") {
  rng::Stream s(33);
  for (double tau : {0.3, 0.5, 0.7}) {
    const CrqProblem problem = random_problem(s, 20, 2, 1, tau);
    const CrqFit crq = fit_crq_orthant(problem, {1});
    // rho_tau(x'b - y) summed equals rho_{1-tau}(y - x'b) summed.
    const QrFit qr =
        fit_quantile_regression({problem.x_matrix, problem.y_matrix.col(0), 1.0 - tau});
    CHECK(std::abs(crq.objective - qr.objective) < 1e-9 * std::max(1.0, qr.objective));
    CHECK(crq.alpha(0) == doctest::Approx(1.0).epsilon(1e-9));
    for (int j = 0; j < 2; ++j) {
      CHECK(crq.beta(j) == doctest::Approx(qr.coefficients(j)).epsilon(1e-6));
    }
  }
}

TEST_CASE("identical inputs give identical fits") {
  rng::Stream s(39);
  const CrqProblem problem = random_problem(s, 22, 3, 2);
  const CrqFit a = fit_crq(problem);
  const CrqFit b = fit_crq(problem);
  CHECK(a.objective == b.objective);
  CHECK((a.alpha.array() == b.alpha.array()).all());
  CHECK((a.beta.array() == b.beta.array()).all());
  CHECK(a.sign_pattern == b.sign_pattern);
}

TEST_CASE("error contracts") {
  rng::Stream s(43);
  CrqProblem problem = random_problem(s, 30, 2, 2);

  CrqProblem too_many = problem;
  too_many.y_matrix = Eigen::MatrixXd::Random(30, 13);
  CHECK_THROWS_AS(fit_crq(too_many), DomainError);

  CrqProblem deficient = problem;
  deficient.x_matrix.col(1) = deficient.x_matrix.col(0);
  CHECK_THROWS_AS(fit_crq(deficient), RankError);

  CrqProblem tiny = random_problem(s, 4, 2, 2);
  CHECK_THROWS_AS(fit_crq(tiny), DomainError);

  Eigen::VectorXd short_alpha(1);
  short_alpha << 1.0;
  CHECK_THROWS_AS(crq_objective(problem, short_alpha, Eigen::VectorXd::Zero(2)), DomainError);

  CHECK_THROWS_AS(fit_crq_orthant(problem, {1, 0}), DomainError);
}
