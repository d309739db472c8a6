#include "crqkit/cancor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "crqkit/errors.hpp"

namespace crqkit {

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() != symmetric.cols()) {
    throw DomainError("jacobi_eigen requires a square matrix");
  }
  if (!symmetric.allFinite()) throw DomainError("jacobi_eigen requires finite entries");

  const int n = static_cast<int>(symmetric.rows());
  Eigen::MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  const double norm = std::max(a.norm(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(2.0 * off) <= 1e-14 * norm) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });

  SymmetricEigen result;
  result.values = Eigen::VectorXd(n);
  result.vectors = Eigen::MatrixXd(n, n);
  for (int k = 0; k < n; ++k) {
    result.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    result.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return result;
}

namespace {

// Spectral inverse powers with the ridge guard applied beforehand.
Eigen::MatrixXd spectral_power(const SymmetricEigen& eig, double exponent) {
  Eigen::VectorXd powered = eig.values;
  for (int i = 0; i < powered.size(); ++i) {
    powered(i) = std::pow(powered(i), exponent);
  }
  return eig.vectors * powered.asDiagonal() * eig.vectors.transpose();
}

SymmetricEigen guarded_eigen(const Eigen::MatrixXd& cov, const char* side) {
  const int dim = static_cast<int>(cov.rows());
  const double trace = cov.trace();
  if (!(trace > 0.0)) {
    throw RankError(std::string(side) + " covariance has nonpositive trace; columns are constant");
  }
  SymmetricEigen eig = jacobi_eigen(cov);
  if (eig.values(dim - 1) < 1e-12 * trace / dim) {
    throw RankError(std::string(side) + " covariance is singular beyond the ridge guard");
  }
  // Ridge applied to the spectrum before the inverse powers are formed.
  eig.values.array() += 1e-10 * trace / dim;
  return eig;
}

}  // namespace

CancorFit fit_cancor(const Eigen::MatrixXd& x_matrix, const Eigen::MatrixXd& y_matrix) {
  const int n = static_cast<int>(x_matrix.rows());
  const int p = static_cast<int>(x_matrix.cols());
  const int q = static_cast<int>(y_matrix.cols());
  if (y_matrix.rows() != n) throw DomainError("x and y row counts differ");
  if (p < 1 || q < 1) throw DomainError("x and y need at least one column each");
  if (n <= p + q) throw InsufficientDataError("need N > p + q observations for canonical correlation");
  if (!x_matrix.allFinite() || !y_matrix.allFinite()) throw DomainError("x and y must be finite");

  const Eigen::MatrixXd xc = x_matrix.rowwise() - x_matrix.colwise().mean();
  const Eigen::MatrixXd yc = y_matrix.rowwise() - y_matrix.colwise().mean();
  const double denom = static_cast<double>(n - 1);
  const Eigen::MatrixXd sxx = xc.transpose() * xc / denom;
  const Eigen::MatrixXd syy = yc.transpose() * yc / denom;
  const Eigen::MatrixXd sxy = xc.transpose() * yc / denom;

  const SymmetricEigen ex = guarded_eigen(sxx, "x");
  const SymmetricEigen ey = guarded_eigen(syy, "y");
  const Eigen::MatrixXd sxx_inv_sqrt = spectral_power(ex, -0.5);
  const Eigen::MatrixXd syy_inv = spectral_power(ey, -1.0);

  Eigen::MatrixXd m = sxx_inv_sqrt * sxy * syy_inv * sxy.transpose() * sxx_inv_sqrt;
  m = 0.5 * (m + m.transpose());
  const SymmetricEigen em = jacobi_eigen(m);

  Eigen::VectorXd xw = sxx_inv_sqrt * em.vectors.col(0);
  Eigen::VectorXd yw = syy_inv * sxy.transpose() * xw;

  const double xvar = xw.dot(sxx * xw);
  const double yvar = yw.dot(syy * yw);
  if (!(xvar > 0.0) || !(yvar > 0.0)) {
    throw RankError("canonical weights collapsed to zero variance");
  }
  xw /= std::sqrt(xvar);
  yw /= std::sqrt(yvar);

  // Largest-magnitude y weight positive, then flip x so the correlation is
  // nonnegative.
  int jmax = 0;
  for (int j = 1; j < q; ++j) {
    if (std::abs(yw(j)) > std::abs(yw(jmax))) jmax = j;
  }
  if (yw(jmax) < 0.0) yw = -yw;
  double correlation = xw.dot(sxy * yw);
  if (correlation < 0.0) {
    xw = -xw;
    correlation = -correlation;
  }

  CancorFit fit;
  fit.x_weights = std::move(xw);
  fit.y_weights = std::move(yw);
  fit.correlation = std::min(correlation, 1.0);
  return fit;
}

}  // namespace crqkit
