#pragma once

#include <Eigen/Dense>

namespace rld {

/// Realized demand is d_hat + sigma_e * z with z ~ N(0, corr).
struct Forecast {
  Eigen::VectorXd d_hat;
  double sigma_e = 1.0;
  Eigen::MatrixXd corr;

  static Forecast iid(Eigen::VectorXd d_hat, double sigma_e);

  int size() const { return static_cast<int>(d_hat.size()); }
  Forecast with_sigma(double sigma) const;
  /// Cholesky factor L of corr (L L' = corr), with a small diagonal jitter
  /// when corr is only semidefinite. Throws CholeskyFailure.
  Eigen::MatrixXd cholesky() const;
  /// Checks dimensions, symmetry, semidefiniteness and sigma_e >= 0.
  void validate() const;
};

}  // namespace rld
