#include "rld/forecast.hpp"

#include <cmath>
#include <utility>

#include "rld/error.hpp"

namespace rld {

Forecast Forecast::iid(Eigen::VectorXd d_hat, double sigma_e) {
  Forecast f;
  const auto n = d_hat.size();
  f.d_hat = std::move(d_hat);
  f.sigma_e = sigma_e;
  f.corr = Eigen::MatrixXd::Identity(n, n);
  return f;
}

Forecast Forecast::with_sigma(double sigma) const {
  Forecast f = *this;
  f.sigma_e = sigma;
  return f;
}

Eigen::MatrixXd Forecast::cholesky() const {
  const auto n = corr.rows();
  for (double jitter : {0.0, 1e-12, 1e-10}) {
    Eigen::LLT<Eigen::MatrixXd> llt(corr + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw Error(ErrorCode::CholeskyFailure, "error covariance is not positive semidefinite");
}

void Forecast::validate() const {
  const auto n = d_hat.size();
  if (corr.rows() != n || corr.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "covariance must be n x n");
  if (!d_hat.allFinite() || !corr.allFinite())
    throw Error(ErrorCode::ValidationError, "forecast entries must be finite");
  if (!(sigma_e >= 0.0) || !std::isfinite(sigma_e))
    throw Error(ErrorCode::ValidationError, "sigma_e must be finite and nonnegative");
  if ((corr - corr.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorCode::ValidationError, "covariance must be symmetric");
  cholesky();
}

}  // namespace rld
