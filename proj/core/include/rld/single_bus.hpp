#pragma once

namespace rld {

/// Optimal day-ahead purchase for one bus: max(0, d_hat + sigma_e * Q^-1(alpha / beta)).
double single_bus_rld(double alpha, double beta, double d_hat, double sigma_e);

/// Integration cost per unit of error standard deviation: beta * phi(Q^-1(alpha / beta)).
double price_of_uncertainty_single(double alpha, double beta);

}  // namespace rld
