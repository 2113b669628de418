#pragma once

#include <Eigen/Dense>

namespace rld {

namespace lp_tolerance {
inline constexpr double pivot = 1e-11;
inline constexpr double feasibility = 1e-8;
inline constexpr double active = 1e-6;
}  // namespace lp_tolerance

/// minimize objective' x
/// subject to eq_matrix x = eq_rhs, ineq_matrix x <= ineq_rhs, lower <= x <= upper.
/// Bounds may be infinite. New programs start with x >= 0 and no rows.
struct LinearProgram {
  explicit LinearProgram(int variables = 0);

  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int variables() const { return static_cast<int>(objective.size()); }
  /// Throws DimensionMismatch or DomainError for malformed programs.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// Multipliers satisfy
///   objective = eq_matrix' dual_eq - ineq_matrix' dual_ineq + dual_lower - dual_upper
/// with dual_ineq, dual_lower, dual_upper >= 0.
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd primal;
  Eigen::VectorXd dual_eq;
  Eigen::VectorXd dual_ineq;
  Eigen::VectorXd dual_lower;
  Eigen::VectorXd dual_upper;
  double objective_value = 0.0;
  int iterations = 0;
};

/// Two-phase revised simplex with Bland's rule. Deterministic for identical input.
LpSolution solve_lp(const LinearProgram& lp);

/// Value of the dual objective for the multipliers in `sol`.
double dual_objective(const LinearProgram& lp, const LpSolution& sol);

}  // namespace rld
