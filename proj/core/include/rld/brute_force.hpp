#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "rld/dcopf.hpp"
#include "rld/eval.hpp"
#include "rld/forecast.hpp"
#include "rld/network.hpp"

namespace rld {

/// Exact real-time cost J(prices, x) as the maximum of affine pieces
/// lambda_v' x - kappa_v over the vertices of the dual feasible set.
/// Intended for small networks; the enumeration is combinatorial and
/// throws Unsupported once it would visit more than `max_subsets` bases.
class RecourseFunction {
 public:
  static constexpr double kDefaultMaxSubsets = 2e6;

  RecourseFunction(const Network& net, const FlowStructure& fs, const Eigen::VectorXd& prices,
                   double max_subsets = kDefaultMaxSubsets);

  double operator()(const Eigen::VectorXd& x) const;

  const Eigen::MatrixXd& slopes() const { return slopes_; }  ///< one row per vertex
  const Eigen::VectorXd& offsets() const { return offsets_; }

 private:
  Eigen::MatrixXd slopes_;
  Eigen::VectorXd offsets_;
};

struct BruteForceOptions {
  double coarse_step = 0.64;
  double fine_step = 0.01;
  double half_width = 4.0;  ///< search box in units of sigma_e
  /// Nominal schedule; solve_nda_opf is used when absent.
  std::optional<Eigen::VectorXd> nominal;
};

struct BruteForceResult {
  Eigen::VectorXd delta;
  double cost = 0.0;
  std::vector<BusId> dimensions;
  /// The best point touches the search box; widen half_width.
  bool grid_too_coarse = false;
};

/// Sample-average day-ahead plus real-time cost of schedule (nominal + sigma * delta)^+.
/// Uses the vertex form when it is small enough and one dispatch LP per scenario otherwise.
class SampleAverageObjective {
 public:
  SampleAverageObjective(const Network& net, const FlowStructure& fs, const CostModel& costs,
                         const Forecast& forecast, const ScenarioBatch& batch,
                         Eigen::VectorXd nominal);

  double operator()(const Eigen::VectorXd& delta) const;
  const Eigen::VectorXd& nominal() const { return nominal_; }

 private:
  Eigen::VectorXd alpha_;
  Eigen::VectorXd nominal_;
  double sigma_;
  Eigen::MatrixXd slopes_;
  Eigen::MatrixXd base_;  ///< scenarios x vertices, lambda_v' d_s - kappa_v

  struct Fallback;
  std::shared_ptr<Fallback> fallback_;
};

/// Grid search over perturbations of the nominal generators (at most three),
/// coarse to fine down to `fine_step`.
BruteForceResult brute_force_two_stage(const Network& net, const FlowStructure& fs,
                                       const CostModel& costs, const Forecast& forecast,
                                       const ScenarioBatch& batch,
                                       const BruteForceOptions& options = {});

}  // namespace rld
