#include "rld/two_bus.hpp"

#include <algorithm>
#include <cmath>

#include "rld/error.hpp"
#include "rld/gaussian.hpp"

namespace rld {

namespace {

// Pairs built from (z1, z2) and their sum s = z1 + z2.
struct Moments {
  GaussianPair z1_s;
  GaussianPair z2_s;
  GaussianPair z1_z2;
  double sd1, sd2, sd_s;
};

Moments moments(const Eigen::Matrix2d& c) {
  const double var_s = c(0, 0) + 2.0 * c(0, 1) + c(1, 1);
  if (c(0, 0) <= 1e-14 || c(1, 1) <= 1e-14 || var_s <= 1e-14)
    throw Error(ErrorCode::DegenerateCovariance, "aggregated errors have a degenerate covariance");
  Moments m;
  m.z1_s = {c(0, 0), var_s, c(0, 0) + c(0, 1)};
  m.z2_s = {c(1, 1), var_s, c(1, 1) + c(0, 1)};
  m.z1_z2 = {c(0, 0), c(1, 1), c(0, 1)};
  m.sd1 = std::sqrt(c(0, 0));
  m.sd2 = std::sqrt(c(1, 1));
  m.sd_s = std::sqrt(var_s);
  return m;
}

double side_two_only_delta(const TwoBusProblem& p, double sd2) {
  return sd2 * normal_isf(p.alpha2 / p.beta2);
}

}  // namespace

Eigen::VectorXd DeltaMap::expand(int bus_count, const Eigen::Vector2d& reduced) const {
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(bus_count);
  const int g = static_cast<int>(generators.size());
  if (sending_surplus) {
    int chosen = -1;
    for (int j = 0; j < g; ++j) {
      if (weights(1, j) > 1e-9) {
        if (chosen >= 0) throw Error(ErrorCode::UnsupportedPattern, "several receiving-side generators");
        chosen = j;
      }
    }
    if (chosen < 0) throw Error(ErrorCode::UnsupportedPattern, "no receiving-side generator");
    delta(generators[static_cast<std::size_t>(chosen)]) = reduced(1) / weights(1, chosen);
    return delta;
  }
  if (g != 2) throw Error(ErrorCode::UnsupportedPattern, "reduction needs exactly two generating buses");
  const Eigen::Matrix2d w = weights;
  if (std::abs(w.determinant()) < 1e-9)
    throw Error(ErrorCode::UnsupportedPattern, "generating buses lie on the same side of the congestion");
  const Eigen::Vector2d local = w.partialPivLu().solve(reduced);
  for (int j = 0; j < 2; ++j) delta(generators[static_cast<std::size_t>(j)]) = local(j);
  return delta;
}

void TwoBusProblem::validate() const {
  if (!(beta1 > 0.0) || !(beta2 > 0.0)) throw Error(ErrorCode::DomainError, "real-time prices must be positive");
  if (!(alpha2 > 0.0) || !(alpha2 < beta2))
    throw Error(ErrorCode::DomainError, "receiving-side price must lie in (0, beta2)");
  if (!delta_map.sending_surplus && (!(alpha1 > 0.0) || !(alpha1 < backflow_price())))
    throw Error(ErrorCode::DomainError, "sending-side price must lie in (0, min(beta1, beta2))");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 || cov.determinant() < -1e-12)
    throw Error(ErrorCode::DegenerateCovariance, "covariance must be symmetric positive semidefinite");
}

Eigen::Vector2d equilibrium_residual(const TwoBusProblem& p, const Eigen::Vector2d& delta) {
  const Moments mo = moments(p.cov);
  const double m = p.backflow_price();
  const double total = delta(0) + delta(1);
  const double tail_s = normal_sf(total / mo.sd_s);
  Eigen::Vector2d f;
  f(0) = m * mo.z1_s.orthant(delta(0), total) - p.alpha1;
  f(1) = p.beta2 * normal_sf(delta(1) / mo.sd2) + m * (tail_s - mo.z2_s.orthant(delta(1), total)) - p.alpha2;
  return f;
}

Eigen::Matrix2d equilibrium_jacobian(const TwoBusProblem& p, const Eigen::Vector2d& delta) {
  const Moments mo = moments(p.cov);
  const double m = p.backflow_price();
  const double total = delta(0) + delta(1);
  const double ds = -normal_pdf(total / mo.sd_s) / mo.sd_s;
  const double a1 = mo.z1_s.orthant_da(delta(0), total);
  const double b1 = mo.z1_s.orthant_db(delta(0), total);
  const double a2 = mo.z2_s.orthant_da(delta(1), total);
  const double b2 = mo.z2_s.orthant_db(delta(1), total);
  Eigen::Matrix2d j;
  j(0, 0) = m * (a1 + b1);
  j(0, 1) = m * b1;
  j(1, 0) = m * (ds - b2);
  j(1, 1) = -p.beta2 * normal_pdf(delta(1) / mo.sd2) / mo.sd2 + m * (ds - a2 - b2);
  return j;
}

double two_bus_expected_cost(const TwoBusProblem& p, const Eigen::Vector2d& delta) {
  const Moments mo = moments(p.cov);
  if (p.delta_map.sending_surplus)
    return p.alpha2 * delta(1) + p.beta2 * expected_excess(delta(1), mo.sd2);
  const double m = p.backflow_price();
  const double total = delta(0) + delta(1);
  const double sum_excess_low2 =
      expected_excess(total, mo.sd_s) - mo.z2_s.swapped().excess_x(total, delta(1));
  const double z1_excess_high2 = mo.z1_z2.excess_x(delta(0), delta(1));
  return p.alpha1 * delta(0) + p.alpha2 * delta(1) + m * (sum_excess_low2 + z1_excess_high2) +
         p.beta2 * expected_excess(delta(1), mo.sd2);
}

double isolated_price(const TwoBusProblem& p) {
  const Moments mo = moments(p.cov);
  auto one = [](double alpha, double beta, double sd) {
    return beta * sd * normal_pdf(normal_isf(alpha / beta));
  };
  return one(p.alpha1, p.beta1, mo.sd1) + one(p.alpha2, p.beta2, mo.sd2);
}

EquilibriumSolution solve_two_bus_equilibrium(const TwoBusProblem& p) {
  p.validate();
  const Moments mo = moments(p.cov);
  const Eigen::Vector2d bound(kDeltaClamp * mo.sd1, kDeltaClamp * mo.sd2);
  auto clamp = [&](Eigen::Vector2d d) {
    for (int i = 0; i < 2; ++i) d(i) = std::clamp(d(i), -bound(i), bound(i));
    return d;
  };

  EquilibriumSolution sol;
  if (p.delta_map.sending_surplus) {
    sol.delta(1) = std::clamp(side_two_only_delta(p, mo.sd2), -bound(1), bound(1));
    sol.saturated = std::abs(sol.delta(1)) >= bound(1);
    sol.residual(1) = p.beta2 * normal_sf(sol.delta(1) / mo.sd2) - p.alpha2;
    sol.price = two_bus_expected_cost(p, sol.delta);
    return sol;
  }

  const double m = p.backflow_price();
  Eigen::Vector2d delta = clamp(Eigen::Vector2d(mo.sd1 * normal_isf(p.alpha1 / m),
                                                side_two_only_delta(p, mo.sd2)));
  Eigen::Vector2d f = equilibrium_residual(p, delta);
  constexpr int kMaxIterations = 100;
  int it = 0;
  for (; it < kMaxIterations && f.lpNorm<Eigen::Infinity>() > 1e-13; ++it) {
    const Eigen::Matrix2d jac = equilibrium_jacobian(p, delta);
    Eigen::Vector2d step;
    if (std::abs(jac.determinant()) > 1e-300) {
      step = -jac.partialPivLu().solve(f);
    } else {
      // Flat region far in the tails: move along the residual sign.
      step = Eigen::Vector2d(f(0) > 0 ? 1.0 : -1.0, f(1) > 0 ? 1.0 : -1.0);
    }
    double t = 1.0;
    bool accepted = false;
    while (t > 1e-10) {
      const Eigen::Vector2d trial = clamp(delta + t * step);
      const Eigen::Vector2d ft = equilibrium_residual(p, trial);
      if (ft.norm() < f.norm()) {
        delta = trial;
        f = ft;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  sol.delta = delta;
  sol.residual = f;
  sol.iterations = it;
  sol.saturated = std::abs(delta(0)) >= bound(0) || std::abs(delta(1)) >= bound(1);
  if (!sol.saturated && f.lpNorm<Eigen::Infinity>() > 1e-7)
    throw Error(ErrorCode::NoConvergence,
                "equilibrium residual " + std::to_string(f.lpNorm<Eigen::Infinity>()) + " after " +
                    std::to_string(it) + " iterations");
  sol.price = two_bus_expected_cost(p, delta);
  return sol;
}

RegionClassification classify_two_bus_region(const Eigen::Vector2d& d_hat, double capacity,
                                             const CostModel& costs, double sigma_e) {
  costs.validate(2);
  if (!(capacity >= 0.0)) throw Error(ErrorCode::DomainError, "capacity must be nonnegative");
  RegionClassification out;
  out.mirrored = costs.alpha(1) < costs.alpha(0);
  const double a = out.mirrored ? d_hat(1) : d_hat(0);
  const double b = out.mirrored ? d_hat(0) : d_hat(1);
  const double c = capacity;

  if (b > c) out.region = a > -c ? Region::E : Region::A;
  else if (b < -c && a > c) out.region = Region::C;
  else out.region = a + b > 0.0 ? Region::B : Region::D;

  const double tol = 1e-6 * sigma_e;
  auto near = [tol](double x, double y) { return std::abs(x - y) <= tol; };
  out.boundary_case = near(b, c) || (b > c - tol && near(a, -c)) ||
                      (a > c - tol && near(b, -c)) || (b < -c + tol && near(a, c)) ||
                      (b <= c + tol && near(a + b, 0.0));
  return out;
}

const char* to_string(Region region) {
  switch (region) {
    case Region::A: return "A";
    case Region::B: return "B";
    case Region::C: return "C";
    case Region::D: return "D";
    case Region::E: return "E";
  }
  return "?";
}

}  // namespace rld
