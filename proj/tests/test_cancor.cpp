#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "crqkit/cancor.hpp"
#include "crqkit/errors.hpp"
#include "crqkit/rng.hpp"

using namespace crqkit;

namespace {

Eigen::MatrixXd gaussian_matrix(rng::Stream& s, int n, int p) {
  Eigen::MatrixXd m(n, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) m(i, j) = s.next_gaussian();
  }
  return m;
}

double sample_pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd ac = a.array() - a.mean();
  const Eigen::ArrayXd bc = b.array() - b.mean();
  return (ac * bc).sum() / std::sqrt(ac.square().sum() * bc.square().sum());
}

}  // namespace

TEST_CASE("jacobi_eigen recovers a known spectrum") {
  Eigen::MatrixXd a(3, 3);
  a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  const SymmetricEigen eig = jacobi_eigen(a);
  // Residual check: A v = lambda v for every pair.
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd r = a * eig.vectors.col(k) - eig.values(k) * eig.vectors.col(k);
    CHECK(r.norm() < 1e-12);
  }
  CHECK(eig.values(0) >= eig.values(1));
  CHECK(eig.values(1) >= eig.values(2));
  CHECK(eig.values.sum() == doctest::Approx(9.0).epsilon(1e-12));
  // Orthonormal vectors.
  CHECK((eig.vectors.transpose() * eig.vectors - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("identical single columns are perfectly correlated") {
  rng::Stream s(2);
  Eigen::MatrixXd x = gaussian_matrix(s, 30, 1);
  const CancorFit fit = fit_cancor(x, x);
  CHECK(fit.correlation == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("independent columns have near-zero leading correlation") {
  rng::Stream s(6);
  Eigen::MatrixXd x = gaussian_matrix(s, 10000, 1);
  Eigen::MatrixXd y = gaussian_matrix(s, 10000, 1);
  const CancorFit fit = fit_cancor(x, y);
  CHECK(fit.correlation < 0.05);
  CHECK(fit.correlation >= 0.0);
}

TEST_CASE("scalar case equals the absolute Pearson correlation") {
  rng::Stream s(10);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::MatrixXd x = gaussian_matrix(s, 50, 1);
    Eigen::MatrixXd y = 0.6 * x + 0.8 * gaussian_matrix(s, 50, 1);
    const CancorFit fit = fit_cancor(x, y);
    CHECK(fit.correlation ==
          doctest::Approx(std::abs(sample_pearson(x.col(0), y.col(0)))).epsilon(1e-9));
  }
}

TEST_CASE("weights have unit variance on the training data") {
  rng::Stream s(14);
  Eigen::MatrixXd x = gaussian_matrix(s, 60, 3);
  Eigen::MatrixXd y = gaussian_matrix(s, 60, 2);
  y.col(0) += 0.5 * x.col(1);
  const CancorFit fit = fit_cancor(x, y);

  const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd yc = y.rowwise() - y.colwise().mean();
  const double xvar = (xc * fit.x_weights).squaredNorm() / (x.rows() - 1);
  const double yvar = (yc * fit.y_weights).squaredNorm() / (y.rows() - 1);
  CHECK(xvar == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(yvar == doctest::Approx(1.0).epsilon(1e-8));

  // Realized correlation of the scores matches the reported value.
  CHECK(sample_pearson(xc * fit.x_weights, yc * fit.y_weights) ==
        doctest::Approx(fit.correlation).epsilon(1e-8));
}

TEST_CASE("correlation is invariant under invertible linear maps") {
  rng::Stream s(18);
  Eigen::MatrixXd x = gaussian_matrix(s, 80, 3);
  Eigen::MatrixXd y = gaussian_matrix(s, 80, 2);
  y.col(1) += 0.7 * x.col(0) - 0.2 * x.col(2);
  const CancorFit base = fit_cancor(x, y);

  Eigen::MatrixXd tx(3, 3);
  tx << 2, 0.5, 0, -1, 1, 0.3, 0.2, 0, 1.5;
  Eigen::MatrixXd ty(2, 2);
  ty << 0.8, -0.6, 0.4, 1.1;
  const CancorFit mapped = fit_cancor(x * tx, y * ty);
  CHECK(mapped.correlation == doctest::Approx(base.correlation).epsilon(1e-8));

  const CancorFit swapped = fit_cancor(y, x);
  CHECK(swapped.correlation == doctest::Approx(base.correlation).epsilon(1e-8));
}

TEST_CASE("correlation never exceeds one") {
  rng::Stream s(22);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd x = gaussian_matrix(s, 25, 2);
    Eigen::MatrixXd y = x * Eigen::MatrixXd::Random(2, 2) + 0.01 * gaussian_matrix(s, 25, 2);
    const CancorFit fit = fit_cancor(x, y);
    CHECK(fit.correlation <= 1.0 + 1e-12);
  }
}

TEST_CASE("largest-magnitude y weight is positive") {
  rng::Stream s(26);
  Eigen::MatrixXd x = gaussian_matrix(s, 40, 2);
  Eigen::MatrixXd y = gaussian_matrix(s, 40, 3);
  y.col(2) += x.col(0);
  const CancorFit fit = fit_cancor(x, y);
  int jmax = 0;
  for (int j = 1; j < 3; ++j) {
    if (std::abs(fit.y_weights(j)) > std::abs(fit.y_weights(jmax))) jmax = j;
  }
  CHECK(fit.y_weights(jmax) > 0.0);
}

TEST_CASE("singular covariance is refused") {
  rng::Stream s(30);
  Eigen::MatrixXd x = gaussian_matrix(s, 30, 2);
  x.col(1) = 2.0 * x.col(0);  // exactly collinear
  Eigen::MatrixXd y = gaussian_matrix(s, 30, 1);
  CHECK_THROWS_AS(fit_cancor(x, y), RankError);

  Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(30, 1);
  CHECK_THROWS_AS(fit_cancor(constant, y), RankError);
}
