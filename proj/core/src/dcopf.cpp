#include "rld/dcopf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rld/error.hpp"

namespace rld {

namespace {

constexpr int kTieBreakSegments = 32;
constexpr int kTieBreakRounds = 40;

void check_sizes(const Network& net, const FlowStructure& fs, const Eigen::VectorXd& prices,
                 const Eigen::VectorXd& demand) {
  const int n = net.bus_count();
  if (fs.bus_count() != n || fs.branch_count() != net.branch_count())
    throw Error(ErrorCode::DimensionMismatch, "flow structure does not match network");
  if (prices.size() != n || demand.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "price or demand vector has wrong length");
  if (!demand.allFinite()) throw Error(ErrorCode::DomainError, "demand must be finite");
  if ((prices.array() < 0.0).any() || !prices.allFinite())
    throw Error(ErrorCode::DomainError, "prices must be finite and nonnegative");
}

std::vector<BranchId> limited_branches(const Network& net) {
  std::vector<BranchId> out;
  for (BranchId k = 0; k < net.branch_count(); ++k) {
    if (net.branch(k).bounded()) out.push_back(k);
  }
  return out;
}

// Rounding residue from the flow map is cleared so idle buses report exactly zero.
Eigen::VectorXd generation_from_flows(const FlowStructure& fs, const Eigen::VectorXd& demand,
                                      const Eigen::VectorXd& f_tilde) {
  Eigen::VectorXd g = demand + fs.injection_map * f_tilde;
  const double floor = 1e-10 * (1.0 + demand.cwiseAbs().sum());
  for (int i = 0; i < g.size(); ++i) {
    if (std::abs(g(i)) < floor) g(i) = 0.0;
  }
  return g;
}

// Balance rows first, then a forward and a backward row per limited branch.
LinearProgram dispatch_program(const Network& net, const FlowStructure& fs,
                               const Eigen::VectorXd& prices,
                               const std::vector<BranchId>& limited, int extra_vars = 0) {
  const int n = net.bus_count();
  const int t = fs.tree_size();
  const int rows = n + 2 * static_cast<int>(limited.size());
  LinearProgram lp(n + t + extra_vars);
  lp.objective.head(n) = prices;
  lp.lower.segment(n, t).setConstant(-kUnbounded);
  lp.ineq_matrix = Eigen::MatrixXd::Zero(rows, n + t + extra_vars);
  lp.ineq_rhs = Eigen::VectorXd::Zero(rows);
  for (int i = 0; i < n; ++i) {
    lp.ineq_matrix(i, i) = -1.0;
    lp.ineq_matrix.row(i).segment(n, t) = fs.injection_map.row(i);
  }
  for (std::size_t l = 0; l < limited.size(); ++l) {
    const int r = n + 2 * static_cast<int>(l);
    const BranchId k = limited[l];
    lp.ineq_matrix.row(r).segment(n, t) = fs.flow_basis.row(k);
    lp.ineq_matrix.row(r + 1).segment(n, t) = -fs.flow_basis.row(k);
    lp.ineq_rhs(r) = net.branch(k).capacity;
    lp.ineq_rhs(r + 1) = net.branch(k).capacity;
  }
  return lp;
}

void set_demand(LinearProgram& lp, const Eigen::VectorXd& demand) {
  lp.ineq_rhs.head(demand.size()) = -demand;
}

OpfResult assemble(const Network& net, const FlowStructure& fs, const std::vector<BranchId>& limited,
                   const Eigen::VectorXd& demand, const LpSolution& sol) {
  if (sol.status == LpStatus::Infeasible)
    throw Error(ErrorCode::InfeasibleNetwork, "dispatch problem is infeasible");
  if (sol.status == LpStatus::Unbounded)
    throw Error(ErrorCode::NumericalFailure, "dispatch problem reported unbounded");
  const int n = net.bus_count();
  const int m = net.branch_count();
  const int t = fs.tree_size();
  OpfResult res;
  res.fundamental_flows = sol.primal.segment(n, t);
  res.flows = fs.flow_basis * res.fundamental_flows;
  res.generation = generation_from_flows(fs, demand, res.fundamental_flows);
  res.cost = sol.objective_value;
  res.bus_duals = sol.dual_ineq.head(n);
  res.congestion_duals_forward = Eigen::VectorXd::Zero(m);
  res.congestion_duals_backward = Eigen::VectorXd::Zero(m);
  for (std::size_t l = 0; l < limited.size(); ++l) {
    const int r = n + 2 * static_cast<int>(l);
    res.congestion_duals_forward(limited[l]) = std::max(0.0, sol.dual_ineq(r));
    res.congestion_duals_backward(limited[l]) = std::max(0.0, sol.dual_ineq(r + 1));
  }
  for (BranchId k : limited) {
    const double cap = net.branch(k).capacity;
    const double flow = res.flows(k);
    const double slack = lp_tolerance::active;
    if (flow >= cap - slack) {
      if (res.congestion_duals_forward(k) > slack) res.congested.push_back({k, 1});
      else res.degenerate_ties.push_back(k);
    } else if (-flow >= cap - slack) {
      if (res.congestion_duals_backward(k) > slack) res.congested.push_back({k, -1});
      else res.degenerate_ties.push_back(k);
    }
  }
  return res;
}

double tie_break_bound(const Eigen::VectorXd& demand, const OpfResult& primary) {
  double total = 0.0;
  for (int i = 0; i < demand.size(); ++i) total += std::max(0.0, demand(i));
  return std::max(total, primary.generation.cwiseMax(0.0).sum()) + 1.0;
}

// Refines the schedule on the optimal face of the linear dispatch by minimizing
// the tie-break curves, approximated piecewise linearly on shrinking windows.
Eigen::VectorXd tie_break_fundamental_flows(const Network& net, const FlowStructure& fs,
                                            const CostModel& costs, const Eigen::VectorXd& d_hat,
                                            const OpfResult& primary,
                                            const std::vector<BranchId>& limited) {
  const int n = net.bus_count();
  const int t = fs.tree_size();
  std::vector<int> buses;
  for (int i = 0; i < n; ++i) {
    if (costs.tie_break[static_cast<std::size_t>(i)]) buses.push_back(i);
  }
  const int nb = static_cast<int>(buses.size());
  const int segs = kTieBreakSegments;
  const int extra = nb * segs;

  const double bound = tie_break_bound(d_hat, primary);
  std::vector<double> base(static_cast<std::size_t>(nb), 0.0);
  std::vector<double> width(static_cast<std::size_t>(nb), bound / segs);
  Eigen::VectorXd f_tilde = primary.fundamental_flows;

  LinearProgram lp = dispatch_program(net, fs, Eigen::VectorXd::Zero(n), limited, extra);
  set_demand(lp, d_hat);
  lp.objective.setZero();
  // Buses without a curve must not soak up the budget slack, so their day-ahead
  // price is scaled past the steepest curve slope.
  double steepest = 1.0;
  double cheapest = kUnbounded;
  for (int i = 0; i < n; ++i) {
    const auto& q = costs.tie_break[static_cast<std::size_t>(i)];
    if (q) steepest = std::max(steepest, 2.0 * std::abs(q->c2) * bound + std::abs(q->c1));
    else if (costs.alpha(i) > 0.0) cheapest = std::min(cheapest, costs.alpha(i));
  }
  for (int i = 0; i < n; ++i) {
    if (!costs.tie_break[static_cast<std::size_t>(i)] && costs.alpha(i) > 0.0)
      lp.objective(i) = 1e3 * steepest * costs.alpha(i) / cheapest;
  }
  const int base_rows = static_cast<int>(lp.ineq_rhs.size());
  lp.ineq_matrix.conservativeResize(base_rows + 1, Eigen::NoChange);
  lp.ineq_matrix.row(base_rows).setZero();
  lp.ineq_matrix.row(base_rows).head(n) = costs.alpha.transpose();
  lp.ineq_rhs.conservativeResize(base_rows + 1);
  lp.ineq_rhs(base_rows) = primary.cost * (1.0 + 1e-12) + 1e-12;
  lp.eq_matrix = Eigen::MatrixXd::Zero(nb, n + t + extra);
  lp.eq_rhs = Eigen::VectorXd::Zero(nb);

  for (int round = 0; round < kTieBreakRounds; ++round) {
    for (int b = 0; b < nb; ++b) {
      const QuadraticCost& q = *costs.tie_break[static_cast<std::size_t>(buses[static_cast<std::size_t>(b)])];
      const double w = width[static_cast<std::size_t>(b)];
      const double lo = base[static_cast<std::size_t>(b)];
      lp.eq_matrix(b, buses[static_cast<std::size_t>(b)]) = 1.0;
      lp.eq_rhs(b) = lo;
      for (int k = 0; k < segs; ++k) {
        const int col = n + t + b * segs + k;
        lp.eq_matrix(b, col) = -1.0;
        lp.upper(col) = w;
        lp.objective(col) = q.c2 * (2.0 * lo + (2.0 * k + 1.0) * w) + q.c1;
      }
    }
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) break;
    f_tilde = sol.primal.segment(n, t);

    double largest = 0.0;
    for (int b = 0; b < nb; ++b) {
      const double y = sol.primal(buses[static_cast<std::size_t>(b)]);
      double& w = width[static_cast<std::size_t>(b)];
      base[static_cast<std::size_t>(b)] = std::max(0.0, y - 4.0 * w);
      w *= 8.0 / segs;
      largest = std::max(largest, w);
    }
    if (largest < 1e-7 * bound) break;
  }
  return f_tilde;
}

}  // namespace

bool CostModel::has_tie_break() const {
  return std::any_of(tie_break.begin(), tie_break.end(), [](const auto& t) { return t.has_value(); });
}

void CostModel::validate(int bus_count) const {
  if (alpha.size() != bus_count || beta.size() != bus_count)
    throw Error(ErrorCode::DimensionMismatch, "cost vectors must have one entry per bus");
  if (!tie_break.empty() && static_cast<int>(tie_break.size()) != bus_count)
    throw Error(ErrorCode::DimensionMismatch, "tie-break list must have one entry per bus");
  if (!alpha.allFinite() || !beta.allFinite() || (alpha.array() < 0.0).any() || (beta.array() < 0.0).any())
    throw Error(ErrorCode::ValidationError, "prices must be finite and nonnegative");
  if (alpha.maxCoeff() > beta.minCoeff())
    throw Error(ErrorCode::ValidationError, "day-ahead prices must not exceed real-time prices");
}

BusId CongestedBranch::sending(const Network& net) const {
  return direction > 0 ? net.branch(branch).from : net.branch(branch).to;
}

BusId CongestedBranch::receiving(const Network& net) const {
  return direction > 0 ? net.branch(branch).to : net.branch(branch).from;
}

OpfResult solve_generic_opf(const Network& net, const FlowStructure& fs,
                            const Eigen::VectorXd& prices, const Eigen::VectorXd& demand) {
  check_sizes(net, fs, prices, demand);
  const std::vector<BranchId> limited = limited_branches(net);
  LinearProgram lp = dispatch_program(net, fs, prices, limited);
  set_demand(lp, demand);
  return assemble(net, fs, limited, demand, solve_lp(lp));
}

OpfResult solve_nda_opf(const Network& net, const FlowStructure& fs, const CostModel& costs,
                        const Eigen::VectorXd& d_hat) {
  costs.validate(net.bus_count());
  OpfResult res = solve_generic_opf(net, fs, costs.alpha, d_hat);
  if (!costs.has_tie_break()) return res;
  const std::vector<BranchId> limited = limited_branches(net);
  res.fundamental_flows = tie_break_fundamental_flows(net, fs, costs, d_hat, res, limited);
  res.flows = fs.flow_basis * res.fundamental_flows;
  res.generation = generation_from_flows(fs, d_hat, res.fundamental_flows);
  return res;
}

double oracle_cost(const Network& net, const FlowStructure& fs, const CostModel& costs,
                   const Eigen::VectorXd& demand) {
  return solve_generic_opf(net, fs, costs.alpha, demand).cost;
}

double rt_opf_cost(const Network& net, const FlowStructure& fs, const CostModel& costs,
                   const Eigen::VectorXd& demand, const Eigen::VectorXd& g_dayahead) {
  if (g_dayahead.size() != demand.size())
    throw Error(ErrorCode::DimensionMismatch, "schedule has wrong length");
  if ((g_dayahead.array() < 0.0).any())
    throw Error(ErrorCode::DomainError, "day-ahead schedule must be nonnegative");
  return solve_generic_opf(net, fs, costs.beta, demand - g_dayahead).cost;
}

DispatchSolver::DispatchSolver(const Network& net, const FlowStructure& fs,
                               const Eigen::VectorXd& prices)
    : net_(&net), fs_(&fs), limited_(limited_branches(net)) {
  check_sizes(net, fs, prices, Eigen::VectorXd::Zero(net.bus_count()));
  lp_ = dispatch_program(net, fs, prices, limited_);
}

LpSolution DispatchSolver::run(const Eigen::VectorXd& demand) {
  if (demand.size() != net_->bus_count())
    throw Error(ErrorCode::DimensionMismatch, "demand vector has wrong length");
  set_demand(lp_, demand);
  return solve_lp(lp_);
}

double DispatchSolver::cost(const Eigen::VectorXd& demand) {
  const LpSolution sol = run(demand);
  if (sol.status != LpStatus::Optimal)
    throw Error(ErrorCode::InfeasibleNetwork, "dispatch problem has no optimum");
  return sol.objective_value;
}

OpfResult DispatchSolver::solve(const Eigen::VectorXd& demand) {
  return assemble(*net_, *fs_, limited_, demand, run(demand));
}

}  // namespace rld
