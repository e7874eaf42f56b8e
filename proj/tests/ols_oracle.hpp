#pragma once

#include <Eigen/Dense>
#include <span>

#include "gigaudit/ols.hpp"

namespace testsupport {

// Least squares with intercept through the Moore-Penrose pseudo-inverse.
// Returns the training R².
inline double pinv_training_r2(const gigaudit::Matrix& x, std::span<const double> y) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  Eigen::MatrixXd a(n, d + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < d; ++j) a(i, j + 1) = x(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd beta = a.completeOrthogonalDecomposition().pseudoInverse() * b;
  const Eigen::VectorXd fitted = a * beta;
  const double mean = b.mean();
  const double ss_res = (b - fitted).squaredNorm();
  const double ss_tot = (b.array() - mean).square().sum();
  return 1.0 - ss_res / ss_tot;
}

}  // namespace testsupport
