#include "rld/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <utility>

#include "rld/error.hpp"

namespace rld {

namespace {

struct Adjacent {
  BusId bus;
  BranchId branch;
};

std::vector<std::vector<Adjacent>> adjacency(const Network& net) {
  std::vector<std::vector<Adjacent>> adj(static_cast<std::size_t>(net.bus_count()));
  for (BranchId k = 0; k < net.branch_count(); ++k) {
    const Branch& br = net.branch(k);
    adj[static_cast<std::size_t>(br.from)].push_back({br.to, k});
    adj[static_cast<std::size_t>(br.to)].push_back({br.from, k});
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end(), [](const Adjacent& a, const Adjacent& b) {
      return a.bus != b.bus ? a.bus < b.bus : a.branch < b.branch;
    });
  }
  return adj;
}

}  // namespace

Network::Network(int bus_count, std::vector<Branch> branches)
    : bus_count_(bus_count), branches_(std::move(branches)) {
  if (bus_count_ < 1) throw Error(ErrorCode::InvalidNetwork, "network needs at least one bus");
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    const Branch& br = branches_[k];
    const std::string where = "branch " + std::to_string(k) + ": ";
    if (br.from < 0 || br.from >= bus_count_ || br.to < 0 || br.to >= bus_count_)
      throw Error(ErrorCode::InvalidNetwork, where + "bus index out of range");
    if (br.from == br.to) throw Error(ErrorCode::InvalidNetwork, where + "self-loop");
    if (!(br.susceptance > 0.0) || !std::isfinite(br.susceptance))
      throw Error(ErrorCode::InvalidNetwork, where + "susceptance must be positive");
    if (std::isnan(br.capacity) || br.capacity < 0.0)
      throw Error(ErrorCode::InvalidNetwork, where + "capacity must be nonnegative");
  }
}

bool Network::connected() const {
  const auto adj = adjacency(*this);
  std::vector<bool> seen(static_cast<std::size_t>(bus_count_), false);
  std::deque<BusId> queue{0};
  seen[0] = true;
  int count = 1;
  while (!queue.empty()) {
    BusId u = queue.front();
    queue.pop_front();
    for (const Adjacent& a : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(a.bus)]) {
        seen[static_cast<std::size_t>(a.bus)] = true;
        ++count;
        queue.push_back(a.bus);
      }
    }
  }
  return count == bus_count_;
}

Network Network::with_single_limit(BranchId keep) const {
  std::vector<Branch> copy = branches_;
  for (std::size_t k = 0; k < copy.size(); ++k) {
    if (static_cast<BranchId>(k) != keep) copy[k].capacity = kUnbounded;
  }
  return Network(bus_count_, std::move(copy));
}

FlowStructure build_flow_structure(const Network& net, BusId tree_root,
                                   std::optional<BranchId> leading_branch) {
  const int n = net.bus_count();
  const int m = net.branch_count();
  if (tree_root < 0 || tree_root >= n)
    throw Error(ErrorCode::DimensionMismatch, "tree root out of range");
  if (leading_branch && (*leading_branch < 0 || *leading_branch >= m))
    throw Error(ErrorCode::DimensionMismatch, "leading branch out of range");

  const auto adj = adjacency(net);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<bool> in_tree(static_cast<std::size_t>(m), false);
  // Each tree edge in discovery order, with the bus it was reached from.
  std::vector<std::pair<BranchId, BusId>> tree;
  std::deque<BusId> queue;

  if (leading_branch) {
    const Branch& br = net.branch(*leading_branch);
    seen[static_cast<std::size_t>(br.from)] = true;
    seen[static_cast<std::size_t>(br.to)] = true;
    in_tree[static_cast<std::size_t>(*leading_branch)] = true;
    tree.emplace_back(*leading_branch, br.from);
    queue.push_back(std::min(br.from, br.to));
    queue.push_back(std::max(br.from, br.to));
  } else {
    seen[static_cast<std::size_t>(tree_root)] = true;
    queue.push_back(tree_root);
  }
  while (!queue.empty()) {
    BusId u = queue.front();
    queue.pop_front();
    for (const Adjacent& a : adj[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(a.bus)]) continue;
      seen[static_cast<std::size_t>(a.bus)] = true;
      in_tree[static_cast<std::size_t>(a.branch)] = true;
      tree.emplace_back(a.branch, u);
      queue.push_back(a.bus);
    }
  }
  if (static_cast<int>(tree.size()) != n - 1)
    throw Error(ErrorCode::DisconnectedNetwork, "network is not connected");

  FlowStructure fs;
  fs.incidence = Eigen::MatrixXd::Zero(n, m);
  for (BranchId k = 0; k < m; ++k) {
    fs.incidence(net.branch(k).from, k) = 1.0;
    fs.incidence(net.branch(k).to, k) = -1.0;
  }

  // Bus angles as linear functions of the tree flows; the search start sits at 0.
  Eigen::MatrixXd angle = Eigen::MatrixXd::Zero(n, n - 1);
  for (int j = 0; j < n - 1; ++j) {
    const auto [k, parent] = tree[static_cast<std::size_t>(j)];
    const Branch& br = net.branch(k);
    fs.tree_branches.push_back(k);
    const BusId child = br.from == parent ? br.to : br.from;
    const double sign = br.from == parent ? -1.0 : 1.0;
    angle.row(child) = angle.row(parent);
    angle(child, j) += sign / br.susceptance;
  }

  fs.flow_basis.resize(m, n - 1);
  for (BranchId k = 0; k < m; ++k) {
    const Branch& br = net.branch(k);
    fs.flow_basis.row(k) = br.susceptance * (angle.row(br.from) - angle.row(br.to));
  }
  for (int j = 0; j < n - 1; ++j) {
    fs.flow_basis.row(fs.tree_branches[static_cast<std::size_t>(j)]).setZero();
    fs.flow_basis(fs.tree_branches[static_cast<std::size_t>(j)], j) = 1.0;
  }

  fs.cycle_matrix = Eigen::MatrixXd::Zero(m - n + 1, m);
  int row = 0;
  for (BranchId k = 0; k < m; ++k) {
    if (in_tree[static_cast<std::size_t>(k)]) continue;
    const Branch& br = net.branch(k);
    fs.cycle_matrix(row, k) = 1.0 / br.susceptance;
    const Eigen::RowVectorXd drop = angle.row(br.from) - angle.row(br.to);
    for (int j = 0; j < n - 1; ++j) {
      fs.cycle_matrix(row, fs.tree_branches[static_cast<std::size_t>(j)]) -= drop(j);
    }
    ++row;
  }

  fs.injection_map = fs.incidence * fs.flow_basis;
  return fs;
}

Eigen::VectorXd injections_from_fundamental(const FlowStructure& fs,
                                            const Eigen::VectorXd& f_tilde) {
  if (f_tilde.size() != fs.tree_size())
    throw Error(ErrorCode::DimensionMismatch, "fundamental flow vector has wrong length");
  return fs.injection_map * f_tilde;
}

}  // namespace rld
