#include "rld/single_bus.hpp"

#include <algorithm>
#include <cmath>

#include "rld/error.hpp"
#include "rld/gaussian.hpp"

namespace rld {

namespace {

void check_prices(double alpha, double beta) {
  if (!(alpha > 0.0) || !(alpha < beta) || !std::isfinite(beta))
    throw Error(ErrorCode::DomainError, "single-bus dispatch needs 0 < alpha < beta");
}

}  // namespace

double single_bus_rld(double alpha, double beta, double d_hat, double sigma_e) {
  check_prices(alpha, beta);
  if (!(sigma_e >= 0.0)) throw Error(ErrorCode::DomainError, "sigma_e must be nonnegative");
  return std::max(0.0, d_hat + sigma_e * normal_isf(alpha / beta));
}

double price_of_uncertainty_single(double alpha, double beta) {
  check_prices(alpha, beta);
  return beta * normal_pdf(normal_isf(alpha / beta));
}

}  // namespace rld
