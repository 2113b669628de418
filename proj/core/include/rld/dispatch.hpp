#pragma once

#include <Eigen/Dense>
#include <optional>

#include "rld/dcopf.hpp"
#include "rld/forecast.hpp"
#include "rld/network.hpp"
#include "rld/two_bus.hpp"

namespace rld {

/// Share of each bus's demand served from the sending side of the congested
/// line when that line carries no extra flow. Requires `fs` built with the
/// congested branch as tree coordinate 0.
Eigen::VectorXd gamma_weights(const FlowStructure& fs, BusId sending, BusId receiving);

/// Price used for the receiving side of the reduced problem.
enum class EffectivePriceRule {
  NodalPrice,  ///< nominal price at the receiving end of the congested line
  GammaRatio,  ///< alpha_k / gamma_k - gamma_k * alpha_sending for an interior generator k
};

struct ReductionOptions {
  EffectivePriceRule price_rule = EffectivePriceRule::NodalPrice;
};

TwoBusProblem reduce_to_two_bus(const Network& net, const CostModel& costs,
                                const Forecast& forecast, const OpfResult& nominal,
                                const ReductionOptions& options = {});

enum class DispatchPath { NoGeneration, SingleBus, TwoBus };

struct RldDispatch {
  Eigen::VectorXd g_star;
  Eigen::VectorXd delta;  ///< in units of sigma_e
  OpfResult nominal;
  double price_of_uncertainty = 0.0;
  DispatchPath path = DispatchPath::SingleBus;
  std::optional<TwoBusProblem> reduction;
  std::optional<EquilibriumSolution> equilibrium;
  bool saturated = false;
};

/// Nominal dispatch, then the analytic perturbation for the congestion pattern
/// found: none (aggregate single bus) or a single congested line (two-bus
/// reduction). More congested lines throw Unsupported.
RldDispatch network_rld(const Network& net, const CostModel& costs, const Forecast& forecast,
                        const ReductionOptions& options = {});

/// As above with a caller-supplied nominal solution.
RldDispatch network_rld(const Network& net, const CostModel& costs, const Forecast& forecast,
                        const OpfResult& nominal, const ReductionOptions& options = {});

/// Buses with strictly positive nominal generation.
std::vector<BusId> generating_buses(const OpfResult& nominal);

const char* to_string(DispatchPath path);

}  // namespace rld
