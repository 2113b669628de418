#pragma once

namespace rld {

double normal_pdf(double x);

/// Upper tail P(Z > x) of the standard normal.
double normal_sf(double x);

/// Inverse of normal_sf; p must lie in (0, 1).
double normal_isf(double p);

/// P(Z1 > a, Z2 > b) for standard normals with correlation rho.
double bivariate_orthant(double a, double b, double rho);

/// E[(X - a)^+] for X ~ N(0, sd^2).
double expected_excess(double a, double sd);

/// Zero-mean bivariate Gaussian (X, Y).
struct GaussianPair {
  double var_x = 1.0;
  double var_y = 1.0;
  double cov = 0.0;

  double sd_x() const;
  double sd_y() const;
  double corr() const;

  /// P(X > a, Y > b)
  double orthant(double a, double b) const;
  /// Partial derivatives of orthant() in a and b.
  double orthant_da(double a, double b) const;
  double orthant_db(double a, double b) const;
  /// E[(X - a)^+ ; Y > b]
  double excess_x(double a, double b) const;

  GaussianPair swapped() const { return {var_y, var_x, cov}; }
};

}  // namespace rld
