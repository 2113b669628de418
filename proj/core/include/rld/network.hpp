#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <vector>

namespace rld {

using BusId = int;
using BranchId = int;

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// A transmission line. Positive flow runs from `from` to `to`.
struct Branch {
  BusId from = 0;
  BusId to = 0;
  double susceptance = 1.0;
  double capacity = kUnbounded;

  bool bounded() const { return capacity < kUnbounded; }
};

class Network {
 public:
  /// Validates ids, susceptances and capacities. Connectivity is checked by
  /// build_flow_structure.
  Network(int bus_count, std::vector<Branch> branches);

  int bus_count() const { return bus_count_; }
  int branch_count() const { return static_cast<int>(branches_.size()); }
  const std::vector<Branch>& branches() const { return branches_; }
  const Branch& branch(BranchId id) const { return branches_.at(static_cast<std::size_t>(id)); }

  bool connected() const;

  /// Copy of this network in which every branch except `keep` is unbounded.
  Network with_single_limit(BranchId keep) const;

 private:
  int bus_count_;
  std::vector<Branch> branches_;
};

struct FlowStructure {
  Eigen::MatrixXd incidence;       ///< n x m, +1 at `from`, -1 at `to`
  Eigen::MatrixXd cycle_matrix;    ///< (m-n+1) x m, reactance weighted
  std::vector<BranchId> tree_branches;
  Eigen::MatrixXd flow_basis;      ///< m x (n-1), branch flows from tree flows
  Eigen::MatrixXd injection_map;   ///< n x (n-1), incidence * flow_basis

  int bus_count() const { return static_cast<int>(incidence.rows()); }
  int branch_count() const { return static_cast<int>(incidence.cols()); }
  int tree_size() const { return static_cast<int>(flow_basis.cols()); }
};

/// Spanning tree by breadth-first search from `tree_root`, visiting neighbours
/// in ascending bus order. When `leading_branch` is given, that branch becomes
/// tree coordinate 0 and the search starts from both of its ends.
FlowStructure build_flow_structure(const Network& net, BusId tree_root = 0,
                                   std::optional<BranchId> leading_branch = std::nullopt);

/// Net bus export (generation minus demand) carried by tree flows `f_tilde`.
Eigen::VectorXd injections_from_fundamental(const FlowStructure& fs,
                                            const Eigen::VectorXd& f_tilde);

}  // namespace rld
