#pragma once

#include <Eigen/Dense>

namespace crqkit {

struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns aligned with values
};

// Cyclic Jacobi eigendecomposition of a small dense symmetric matrix.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric);

struct CancorFit {
  Eigen::VectorXd x_weights;  // unit training variance
  Eigen::VectorXd y_weights;  // unit training variance
  double correlation = 0.0;   // leading canonical correlation, in [0, 1]
};

// Leading classical canonical correlation pair. Columns are centered
// internally; covariances get a ridge of 1e-10 * trace/dim before inversion
// and the fit is refused if the smallest eigenvalue stays below
// 1e-12 * trace/dim. Signs are fixed so the largest-magnitude y weight is
// positive.
CancorFit fit_cancor(const Eigen::MatrixXd& x_matrix, const Eigen::MatrixXd& y_matrix);

}  // namespace crqkit
