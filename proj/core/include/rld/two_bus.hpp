#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rld/dcopf.hpp"
#include "rld/network.hpp"

namespace rld {

/// How reduced perturbations (side 1, side 2) map back to generating buses.
struct DeltaMap {
  std::vector<BusId> generators;
  /// Row 0: weight of each generator in the side-1 perturbation, row 1: side 2.
  Eigen::MatrixXd weights;
  /// Side 1 holds free surplus; only the side-2 perturbation matters.
  bool sending_surplus = false;

  /// Per-bus perturbation of length `bus_count`. Throws UnsupportedPattern
  /// when the generator set cannot represent the reduced solution.
  Eigen::VectorXd expand(int bus_count, const Eigen::Vector2d& reduced) const;
};

/// Two buses joined by a line congested from bus 1 to bus 2, with normalized
/// (possibly correlated) errors.
struct TwoBusProblem {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
  Eigen::VectorXd gamma;
  DeltaMap delta_map;

  double backflow_price() const { return std::min(beta1, beta2); }
  void validate() const;
};

struct EquilibriumSolution {
  Eigen::Vector2d delta = Eigen::Vector2d::Zero();
  double price = 0.0;
  Eigen::Vector2d residual = Eigen::Vector2d::Zero();
  int iterations = 0;
  bool saturated = false;
};

inline constexpr double kDeltaClamp = 8.0;

/// Residuals of the first-order conditions in (delta1, delta2).
Eigen::Vector2d equilibrium_residual(const TwoBusProblem& p, const Eigen::Vector2d& delta);
Eigen::Matrix2d equilibrium_jacobian(const TwoBusProblem& p, const Eigen::Vector2d& delta);

/// Damped Newton from the decoupled single-bus solution. Perturbations are
/// clamped to +-8 standard deviations, in which case `saturated` is set.
EquilibriumSolution solve_two_bus_equilibrium(const TwoBusProblem& p);

/// Expected day-ahead plus real-time cost per unit sigma at perturbation `delta`.
double two_bus_expected_cost(const TwoBusProblem& p, const Eigen::Vector2d& delta);

/// Price of uncertainty when the two buses are operated in isolation.
double isolated_price(const TwoBusProblem& p);

enum class Region { A, B, C, D, E };

struct RegionClassification {
  Region region = Region::B;
  bool boundary_case = false;
  /// The second bus is the cheaper one; regions are reported in the frame
  /// where the cheaper bus comes first.
  bool mirrored = false;
};

/// Nominal outcome for a two-bus network with forecast d_hat and line capacity c.
/// E: both buses generate, line congested toward the expensive bus.
/// A: cheap bus has surplus and exports at capacity. C: mirror of A.
/// B: uncongested with positive total demand. D: uncongested, no net demand.
RegionClassification classify_two_bus_region(const Eigen::Vector2d& d_hat, double capacity,
                                             const CostModel& costs, double sigma_e);

const char* to_string(Region region);

}  // namespace rld
