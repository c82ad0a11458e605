#pragma once

#include <Eigen/Dense>

namespace cdtkit::detail {

struct NnlsResult {
  /// Minimizer of |A x - b| over x >= 0.
  Eigen::VectorXd x;
  /// b - A x. At the optimum A^T r <= 0, so when r != 0 it is a Farkas
  /// certificate for {x >= 0 : A x = b}: A^T r <= 0 and b^T r = |r|^2 > 0.
  Eigen::VectorXd residual;
  int iterations = 0;
};

/// Lawson-Hanson active set method.
NnlsResult solve_nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace cdtkit::detail
