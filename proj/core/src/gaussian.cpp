#include "rld/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "rld/error.hpp"

namespace rld {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Wichura's AS241 lower-tail quantile.
double lower_quantile(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r < 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

// Gauss-Legendre half rules (6, 12 and 20 points) used by the Drezner-Wesolowsky
// style integral of Genz's BVNU.
struct HalfRule {
  const double* x;
  const double* w;
  int size;
};

constexpr std::array<double, 3> kX6{-0.9324695142031522, -0.6612093864662647, -0.2386191860831970};
constexpr std::array<double, 3> kW6{0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
constexpr std::array<double, 6> kX12{-0.9815606342467191, -0.9041172563704750, -0.7699026741943050,
                                     -0.5873179542866171, -0.3678314989981802, -0.1252334085114692};
constexpr std::array<double, 6> kW12{0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                     0.2031674267230659, 0.2334925365383547, 0.2491470458134029};
constexpr std::array<double, 10> kX20{-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
                                      -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
                                      -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
                                      -0.07652652113349733};
constexpr std::array<double, 10> kW20{0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                                      0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
                                      0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
                                      0.1527533871307259};

HalfRule rule_for(double r) {
  const double a = std::abs(r);
  if (a < 0.3) return {kX6.data(), kW6.data(), 3};
  if (a < 0.75) return {kX12.data(), kW12.data(), 6};
  return {kX20.data(), kW20.data(), 10};
}

double bvnu(double h, double k, double r) {
  const HalfRule g = rule_for(r);
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (int i = 0; i < g.size; ++i) {
      double sn = std::sin(asr * (g.x[i] + 1.0) / 2.0);
      bvn += g.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (-g.x[i] + 1.0) / 2.0);
      bvn += g.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * kTwoPi) + normal_cdf(-h) * normal_cdf(-k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < g.size; ++i) {
      double xs = a * (g.x[i] + 1.0);
      xs *= xs;
      double rs = std::sqrt(1.0 - xs);
      bvn += a * g.w[i] *
             (std::exp(-bs / (xs * 2.0) - hk / (rs + 1.0)) / rs -
              std::exp(-(bs / xs + hk) / 2.0) * (c * xs * (d * xs + 1.0) + 1.0));
      xs = as * (1.0 - g.x[i]) * (1.0 - g.x[i]) / 4.0;
      rs = std::sqrt(1.0 - xs);
      bvn += a * g.w[i] * std::exp(-(bs / xs + hk) / 2.0) *
             (std::exp(-hk * (1.0 - rs) / ((rs + 1.0) * 2.0)) / rs - (c * xs * (d * xs + 1.0) + 1.0));
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) return bvn + normal_cdf(-std::max(h, k));
  return -bvn + std::max(0.0, normal_cdf(-h) - normal_cdf(-k));
}

// Conditional tail factor Q((y - rho x) / sqrt(1 - rho^2)), with the rho = +-1 limit.
double conditional_tail(double y, double x, double rho) {
  const double s2 = 1.0 - rho * rho;
  const double gap = y - rho * x;
  if (s2 <= 1e-24) return gap < 0.0 ? 1.0 : (gap > 0.0 ? 0.0 : 0.5);
  return normal_sf(gap / std::sqrt(s2));
}

}  // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_isf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::DomainError, "tail probability must lie in (0, 1)");
  double x = -lower_quantile(p);
  const double density = normal_pdf(x);
  if (density > 0.0) x += (normal_sf(x) - p) / density;
  return x;
}

double bivariate_orthant(double a, double b, double rho) {
  if (!(std::abs(rho) <= 1.0)) throw Error(ErrorCode::DomainError, "correlation must lie in [-1, 1]");
  if (std::isnan(a) || std::isnan(b)) throw Error(ErrorCode::DomainError, "orthant limits must not be NaN");
  if (a == -INFINITY) return b == -INFINITY ? 1.0 : normal_sf(b);
  if (b == -INFINITY) return normal_sf(a);
  if (a == INFINITY || b == INFINITY) return 0.0;
  return std::clamp(bvnu(a, b, rho), 0.0, 1.0);
}

double expected_excess(double a, double sd) {
  if (sd <= 0.0) return std::max(0.0, -a);
  const double u = a / sd;
  return sd * normal_pdf(u) - a * normal_sf(u);
}

double GaussianPair::sd_x() const { return std::sqrt(var_x); }
double GaussianPair::sd_y() const { return std::sqrt(var_y); }

double GaussianPair::corr() const {
  if (var_x <= 0.0 || var_y <= 0.0)
    throw Error(ErrorCode::DegenerateCovariance, "variance must be positive");
  return std::clamp(cov / std::sqrt(var_x * var_y), -1.0, 1.0);
}

double GaussianPair::orthant(double a, double b) const {
  return bivariate_orthant(a / sd_x(), b / sd_y(), corr());
}

double GaussianPair::orthant_da(double a, double b) const {
  const double u = a / sd_x();
  const double v = b / sd_y();
  return -normal_pdf(u) / sd_x() * conditional_tail(v, u, corr());
}

double GaussianPair::orthant_db(double a, double b) const { return swapped().orthant_da(b, a); }

double GaussianPair::excess_x(double a, double b) const {
  const double sx = sd_x();
  const double rho = corr();
  const double u = a / sx;
  const double v = b / sd_y();
  const double first_moment =
      normal_pdf(u) * conditional_tail(v, u, rho) + rho * normal_pdf(v) * conditional_tail(u, v, rho);
  return sx * first_moment - a * orthant(a, b);
}

}  // namespace rld
