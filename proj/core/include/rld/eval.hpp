#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rld/dcopf.hpp"
#include "rld/dispatch.hpp"
#include "rld/forecast.hpp"
#include "rld/network.hpp"

namespace rld {

struct ScenarioBatch {
  std::uint64_t seed = 0;
  Eigen::MatrixXd z;  ///< count x n standardized errors, z ~ N(0, corr)

  int count() const { return static_cast<int>(z.rows()); }
  Eigen::VectorXd realized(const Forecast& forecast, int scenario) const;
};

ScenarioBatch sample_scenarios(const Forecast& forecast, std::uint64_t seed, int count);

using ScheduleFn = std::function<Eigen::VectorXd(const Network&, const FlowStructure&,
                                                 const CostModel&, const Forecast&)>;

struct Policy {
  std::string name;
  /// Day-ahead schedule; empty for the clairvoyant oracle.
  ScheduleFn schedule;
  /// When set, real-time balancing and the paired oracle use this network.
  std::shared_ptr<const Network> settlement;

  bool clairvoyant() const { return !schedule; }
};

Policy oracle_policy();
Policy rld_policy(ReductionOptions options = {});
Policy three_sigma_policy();
/// Nominal schedule plus the single-bus reserve of the whole system, ignoring congestion.
Policy congestion_ignorant_policy();
/// RLD settled on a copy of `net` where only the nominally congested line is limited.
Policy lower_bound_policy(const Network& net, const CostModel& costs, const Forecast& forecast);

/// Nominal schedule plus a reserve of 3 sigma per unit of per-bus error spread,
/// shared equally by the nominal generators.
Eigen::VectorXd three_sigma_schedule(const Network& net, const FlowStructure& fs,
                                     const CostModel& costs, const Forecast& forecast);

struct PolicyStats {
  std::string name;
  double mean_total = 0.0;
  double stderr_total = 0.0;
  double mean_stage1 = 0.0;
  double mean_stage2 = 0.0;
  double integration_cost = 0.0;
  double integration_stderr = 0.0;
  std::vector<double> scenario_totals;       ///< filled when requested
  std::vector<double> scenario_integration;  ///< filled when requested
};

struct SigmaReport {
  double sigma = 0.0;
  std::vector<PolicyStats> policies;
  int excluded_scenarios = 0;

  const PolicyStats& policy(const std::string& name) const;
};

struct PriceFit {
  std::string policy;
  double slope = 0.0;       ///< least squares through the origin
  double half_width = 0.0;  ///< 95% interval from per-scenario slopes
  double free_intercept = 0.0;
  double free_slope = 0.0;
  double r_squared = 0.0;  ///< of the free-intercept fit
};

struct EvaluationReport {
  std::uint64_t seed = 0;
  int scenarios = 0;
  std::vector<double> sigma_grid;
  std::vector<SigmaReport> by_sigma;
  std::vector<PriceFit> fits;

  const PriceFit& fit(const std::string& name) const;
};

struct EvaluationOptions {
  int threads = 1;
  bool keep_scenario_costs = false;
  double max_excluded_fraction = 1e-3;
};

/// Costs every policy on every scenario with common random numbers.
SigmaReport evaluate(const Network& net, const FlowStructure& fs, const CostModel& costs,
                     const Forecast& forecast, const std::vector<Policy>& policies,
                     const ScenarioBatch& batch, const EvaluationOptions& options = {});

/// evaluate() for each sigma with one shared batch, plus the slope of
/// integration cost against sigma per policy.
EvaluationReport price_sweep(const Network& net, const FlowStructure& fs, const CostModel& costs,
                             const Forecast& base, const std::vector<double>& sigma_grid,
                             std::uint64_t seed, int count, const std::vector<Policy>& policies,
                             const EvaluationOptions& options = {});

}  // namespace rld
