#include "rld/brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "rld/error.hpp"

namespace rld {

namespace {

constexpr double kVertexTol = 1e-9;

std::vector<BusId> positive_entries(const Eigen::VectorXd& g) {
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  std::vector<BusId> out;
  for (int i = 0; i < g.size(); ++i) {
    if (g(i) > 1e-6 * scale) out.push_back(i);
  }
  return out;
}

// Calls visit(mask) for every subset of {0..n-1} with exactly k members.
void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> pick(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;
  if (k > n) return;
  while (true) {
    visit(pick);
    int i = k - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

}  // namespace

RecourseFunction::RecourseFunction(const Network& net, const FlowStructure& fs,
                                   const Eigen::VectorXd& prices, double max_subsets) {
  const int n = net.bus_count();
  if (prices.size() != n) throw Error(ErrorCode::DimensionMismatch, "price vector has wrong length");
  std::vector<BranchId> limited;
  for (BranchId k = 0; k < net.branch_count(); ++k) {
    if (net.branch(k).bounded()) limited.push_back(k);
  }
  const int mf = static_cast<int>(limited.size());
  const int dim = n + 2 * mf;
  const int eqs = n - 1;

  // Dual feasible set: A' lambda + R_f' (mu+ - mu-) = 0, 0 <= lambda <= q, mu >= 0.
  Eigen::MatrixXd eq = Eigen::MatrixXd::Zero(eqs, dim);
  eq.leftCols(n) = fs.injection_map.transpose();
  for (int j = 0; j < mf; ++j) {
    eq.col(n + j) = fs.flow_basis.row(limited[static_cast<std::size_t>(j)]).transpose();
    eq.col(n + mf + j) = -fs.flow_basis.row(limited[static_cast<std::size_t>(j)]).transpose();
  }
  // Inequality i reads sign * w(var) >= bound.
  struct Face {
    int var;
    double sign;
    double bound;
  };
  std::vector<Face> faces;
  for (int i = 0; i < n; ++i) {
    faces.push_back({i, 1.0, 0.0});
    faces.push_back({i, -1.0, -prices(i)});
  }
  for (int j = 0; j < 2 * mf; ++j) faces.push_back({n + j, 1.0, 0.0});

  Eigen::VectorXd cap(2 * mf);
  for (int j = 0; j < mf; ++j) {
    cap(j) = net.branch(limited[static_cast<std::size_t>(j)]).capacity;
    cap(mf + j) = cap(j);
  }

  std::vector<Eigen::VectorXd> vertices;
  const int active = dim - eqs;
  if (binomial(static_cast<int>(faces.size()), active) > max_subsets)
    throw Error(ErrorCode::Unsupported, "too many candidate bases for vertex enumeration");
  for_each_subset(static_cast<int>(faces.size()), active, [&](const std::vector<int>& pick) {
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    sys.topRows(eqs) = eq;
    for (int r = 0; r < active; ++r) {
      const Face& f = faces[static_cast<std::size_t>(pick[static_cast<std::size_t>(r)])];
      sys(eqs + r, f.var) = f.sign;
      rhs(eqs + r) = f.bound;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (lu.rank() < dim) return;
    const Eigen::VectorXd w = lu.solve(rhs);
    for (const Face& f : faces) {
      if (f.sign * w(f.var) < f.bound - kVertexTol) return;
    }
    if (eqs > 0 && (eq * w).cwiseAbs().maxCoeff() > kVertexTol) return;
    for (const Eigen::VectorXd& v : vertices) {
      if ((v - w).cwiseAbs().maxCoeff() < 1e-8) return;
    }
    vertices.push_back(w);
  });
  if (vertices.empty()) throw Error(ErrorCode::NumericalFailure, "dual feasible set has no vertex");

  slopes_.resize(static_cast<int>(vertices.size()), n);
  offsets_.resize(static_cast<int>(vertices.size()));
  for (int v = 0; v < static_cast<int>(vertices.size()); ++v) {
    slopes_.row(v) = vertices[static_cast<std::size_t>(v)].head(n).transpose();
    offsets_(v) = mf > 0 ? cap.dot(vertices[static_cast<std::size_t>(v)].tail(2 * mf)) : 0.0;
  }
}

double RecourseFunction::operator()(const Eigen::VectorXd& x) const {
  return (slopes_ * x - offsets_).maxCoeff();
}

struct SampleAverageObjective::Fallback {
  Fallback(const Network& n, const FlowStructure& f, const Eigen::VectorXd& prices, Eigen::MatrixXd d)
      : net(n), fs(f), solver(net, fs, prices), demand(std::move(d)) {}

  double mean_cost(const Eigen::VectorXd& g) {
    double total = 0.0;
    for (Eigen::Index s = 0; s < demand.rows(); ++s) total += solver.cost(demand.row(s).transpose() - g);
    return total / static_cast<double>(demand.rows());
  }

  Network net;
  FlowStructure fs;
  DispatchSolver solver;
  Eigen::MatrixXd demand;
};

SampleAverageObjective::SampleAverageObjective(const Network& net, const FlowStructure& fs,
                                               const CostModel& costs, const Forecast& forecast,
                                               const ScenarioBatch& batch, Eigen::VectorXd nominal)
    : alpha_(costs.alpha), nominal_(std::move(nominal)), sigma_(forecast.sigma_e) {
  const int n = net.bus_count();
  if (nominal_.size() != n || batch.z.cols() != n || forecast.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "objective inputs do not match the network");
  const Eigen::MatrixXd demand =
      (batch.z * sigma_).rowwise() + forecast.d_hat.transpose();  // scenarios x n
  std::optional<RecourseFunction> recourse;
  try {
    recourse.emplace(net, fs, costs.beta);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unsupported) throw;
  }
  if (!recourse) {
    fallback_ = std::make_shared<Fallback>(net, fs, costs.beta, demand);
    return;
  }
  slopes_ = recourse->slopes();
  base_ = (demand * slopes_.transpose()).rowwise() - recourse->offsets().transpose();
}

double SampleAverageObjective::operator()(const Eigen::VectorXd& delta) const {
  const Eigen::VectorXd g = (nominal_ + sigma_ * delta).cwiseMax(0.0);
  if (fallback_) return alpha_.dot(g) + fallback_->mean_cost(g);
  const Eigen::VectorXd shift = slopes_ * g;
  const Eigen::Index rows = base_.rows();
  const Eigen::Index vs = base_.cols();
  double total = 0.0;
  for (Eigen::Index s = 0; s < rows; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index v = 0; v < vs; ++v) best = std::max(best, base_(s, v) - shift(v));
    total += best;
  }
  return alpha_.dot(g) + total / static_cast<double>(rows);
}

BruteForceResult brute_force_two_stage(const Network& net, const FlowStructure& fs,
                                       const CostModel& costs, const Forecast& forecast,
                                       const ScenarioBatch& batch, const BruteForceOptions& options) {
  const int n = net.bus_count();
  if (n > 3) throw Error(ErrorCode::Unsupported, "brute force search is limited to three buses");
  costs.validate(n);
  forecast.validate();
  if (!(options.fine_step > 0.0) || !(options.coarse_step >= options.fine_step) || !(options.half_width > 0.0))
    throw Error(ErrorCode::DomainError, "invalid grid specification");

  Eigen::VectorXd nominal = options.nominal ? *options.nominal
                                            : solve_nda_opf(net, fs, costs, forecast.d_hat).generation;
  const SampleAverageObjective objective(net, fs, costs, forecast, batch, nominal);

  BruteForceResult result;
  result.dimensions = positive_entries(nominal);
  const int k = static_cast<int>(result.dimensions.size());
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_cost = objective(best);

  auto consider = [&](const Eigen::VectorXd& candidate) {
    const double c = objective(candidate);
    if (c < best_cost) {
      best_cost = c;
      best = candidate;
    }
  };
  auto lattice = [&](const Eigen::VectorXd& center, double step, int reach) {
    const int side = 2 * reach + 1;
    int total = 1;
    for (int d = 0; d < k; ++d) total *= side;
    for (int idx = 0; idx < total; ++idx) {
      Eigen::VectorXd p = center;
      int rem = idx;
      bool inside = true;
      for (int d = 0; d < k; ++d) {
        const BusId bus = result.dimensions[static_cast<std::size_t>(d)];
        p(bus) = center(bus) + step * static_cast<double>(rem % side - reach);
        p(bus) = std::round(p(bus) / options.fine_step) * options.fine_step;
        rem /= side;
        inside = inside && std::abs(p(bus)) <= options.half_width + 1e-12;
      }
      if (inside) consider(p);
    }
  };

  if (k > 0) {
    double step = options.coarse_step;
    lattice(Eigen::VectorXd::Zero(n), step, static_cast<int>(std::floor(options.half_width / step + 1e-9)));
    while (step > options.fine_step * (1.0 + 1e-9)) {
      step = std::max(options.fine_step, step / 2.0);
      lattice(best, step, 4);
    }
    for (int guard = 0; guard < 10000; ++guard) {
      const double before = best_cost;
      lattice(best, options.fine_step, 1);
      if (!(best_cost < before)) break;
    }
  }

  result.delta = best;
  result.cost = best_cost;
  for (BusId bus : result.dimensions) {
    result.grid_too_coarse =
        result.grid_too_coarse || std::abs(best(bus)) >= options.half_width - options.fine_step / 2.0;
  }
  return result;
}

}  // namespace rld
