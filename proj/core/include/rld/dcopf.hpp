#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "rld/lp.hpp"
#include "rld/network.hpp"

namespace rld {

/// c2 * g^2 + c1 * g, used only to pick one schedule among equal-cost optima.
struct QuadraticCost {
  double c2 = 0.0;
  double c1 = 0.0;
};

struct CostModel {
  Eigen::VectorXd alpha;  ///< day-ahead price per bus
  Eigen::VectorXd beta;   ///< real-time price per bus
  /// Optional per-bus tie-break curves for the nominal dispatch.
  std::vector<std::optional<QuadraticCost>> tie_break;

  int size() const { return static_cast<int>(alpha.size()); }
  bool has_tie_break() const;
  /// Checks sizes, nonnegativity and max(alpha) <= min(beta).
  void validate(int bus_count) const;
};

struct CongestedBranch {
  BranchId branch = 0;
  int direction = 1;  ///< +1 when flow runs from -> to at capacity, -1 otherwise

  BusId sending(const Network& net) const;
  BusId receiving(const Network& net) const;
  bool operator==(const CongestedBranch&) const = default;
};

struct OpfResult {
  Eigen::VectorXd generation;
  Eigen::VectorXd flows;
  Eigen::VectorXd fundamental_flows;
  double cost = 0.0;
  Eigen::VectorXd bus_duals;
  Eigen::VectorXd congestion_duals_forward;   ///< from -> to limit
  Eigen::VectorXd congestion_duals_backward;  ///< to -> from limit
  std::vector<CongestedBranch> congested;
  /// Branches at their limit with a zero multiplier.
  std::vector<BranchId> degenerate_ties;
};

/// min q'y  s.t.  y >= demand + A f~, y >= 0, |R f~| <= capacity.
OpfResult solve_generic_opf(const Network& net, const FlowStructure& fs,
                            const Eigen::VectorXd& prices, const Eigen::VectorXd& demand);

/// Day-ahead dispatch on the forecast. When the cost model carries tie-break
/// curves, flows and generation are chosen among the optimal schedules by
/// minimizing the tie-break cost; multipliers come from the linear problem.
OpfResult solve_nda_opf(const Network& net, const FlowStructure& fs, const CostModel& costs,
                        const Eigen::VectorXd& d_hat);

double oracle_cost(const Network& net, const FlowStructure& fs, const CostModel& costs,
                   const Eigen::VectorXd& demand);

double rt_opf_cost(const Network& net, const FlowStructure& fs, const CostModel& costs,
                   const Eigen::VectorXd& demand, const Eigen::VectorXd& g_dayahead);

/// Reusable dispatch LP for fixed network and prices; only the demand changes
/// between solves. Not thread safe; use one per thread.
class DispatchSolver {
 public:
  DispatchSolver(const Network& net, const FlowStructure& fs, const Eigen::VectorXd& prices);

  double cost(const Eigen::VectorXd& demand);
  OpfResult solve(const Eigen::VectorXd& demand);

 private:
  LpSolution run(const Eigen::VectorXd& demand);

  const Network* net_;
  const FlowStructure* fs_;
  std::vector<BranchId> limited_;
  LinearProgram lp_;
};

}  // namespace rld
