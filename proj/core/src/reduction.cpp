#include "rld/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rld/error.hpp"
#include "rld/gaussian.hpp"

namespace rld {

namespace {

constexpr double kSurplusPrice = 1e-9;

Eigen::Matrix2d aggregated_covariance(const Eigen::MatrixXd& corr, const Eigen::VectorXd& gamma) {
  const Eigen::VectorXd rest = Eigen::VectorXd::Ones(gamma.size()) - gamma;
  Eigen::Matrix2d c;
  c(0, 0) = gamma.dot(corr * gamma);
  c(0, 1) = gamma.dot(corr * rest);
  c(1, 0) = c(0, 1);
  c(1, 1) = rest.dot(corr * rest);
  return c;
}

RldDispatch finish(const Forecast& forecast, RldDispatch out) {
  out.g_star = (out.nominal.generation + forecast.sigma_e * out.delta).cwiseMax(0.0);
  return out;
}

}  // namespace

std::vector<BusId> generating_buses(const OpfResult& nominal) {
  const double scale = std::max(1.0, nominal.generation.cwiseAbs().maxCoeff());
  std::vector<BusId> out;
  for (int i = 0; i < nominal.generation.size(); ++i) {
    if (nominal.generation(i) > 1e-6 * scale) out.push_back(i);
  }
  return out;
}

Eigen::VectorXd gamma_weights(const FlowStructure& fs, BusId sending, BusId receiving) {
  const int n = fs.bus_count();
  if (n < 2) throw Error(ErrorCode::DimensionMismatch, "gamma weights need at least two buses");
  if (sending < 0 || sending >= n || receiving < 0 || receiving >= n || sending == receiving)
    throw Error(ErrorCode::DimensionMismatch, "invalid congested bus pair");
  const BranchId lead = fs.tree_branches.front();
  if (fs.incidence(sending, lead) == 0.0 || fs.incidence(receiving, lead) == 0.0)
    throw Error(ErrorCode::DimensionMismatch, "congested branch must be tree coordinate 0");

  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n - 1, n - 1);
  system(0, 0) = 1.0;
  std::vector<BusId> interior;
  for (BusId i = 0; i < n; ++i) {
    if (i == sending || i == receiving) continue;
    interior.push_back(i);
    system.row(static_cast<int>(interior.size())) = fs.injection_map.row(i);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (lu.rank() < n - 1) throw Error(ErrorCode::SingularSystem, "congestion system is singular");

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n - 1, static_cast<int>(interior.size()));
  for (int j = 0; j < static_cast<int>(interior.size()); ++j) rhs(j + 1, j) = -1.0;
  const Eigen::MatrixXd flows = lu.solve(rhs);

  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n);
  gamma(sending) = 1.0;
  for (int j = 0; j < static_cast<int>(interior.size()); ++j) {
    gamma(interior[static_cast<std::size_t>(j)]) = fs.injection_map.row(sending).dot(flows.col(j));
  }
  return gamma;
}

TwoBusProblem reduce_to_two_bus(const Network& net, const CostModel& costs,
                                const Forecast& forecast, const OpfResult& nominal,
                                const ReductionOptions& options) {
  const int n = net.bus_count();
  costs.validate(n);
  forecast.validate();
  if (forecast.size() != n) throw Error(ErrorCode::DimensionMismatch, "forecast size differs from network");
  if (nominal.congested.empty()) throw Error(ErrorCode::UnsupportedPattern, "no congested line to reduce");
  if (nominal.congested.size() > 1)
    throw Error(ErrorCode::MultipleCongestion,
                std::to_string(nominal.congested.size()) + " congested lines");

  const CongestedBranch& line = nominal.congested.front();
  const BusId s = line.sending(net);
  const BusId t = line.receiving(net);
  double others = kUnbounded;
  for (BusId i = 0; i < n; ++i) {
    if (i != s && i != t) others = std::min(others, costs.beta(i));
  }
  if (std::max(costs.beta(s), costs.beta(t)) > others + 1e-12)
    throw Error(ErrorCode::UnsupportedPattern,
                "real-time prices at the congested line must not exceed those elsewhere");

  const FlowStructure fs = build_flow_structure(net, s, line.branch);
  TwoBusProblem p;
  p.gamma = gamma_weights(fs, s, t);
  p.beta1 = costs.beta(s);
  p.beta2 = costs.beta(t);
  p.cov = aggregated_covariance(forecast.corr, p.gamma);

  const double lambda_s = nominal.bus_duals(s);
  const double lambda_t = nominal.bus_duals(t);
  p.alpha1 = lambda_s;
  p.alpha2 = lambda_t;

  DeltaMap& map = p.delta_map;
  map.generators = generating_buses(nominal);
  map.sending_surplus = lambda_s <= kSurplusPrice;
  const int g = static_cast<int>(map.generators.size());
  map.weights.resize(2, g);
  for (int j = 0; j < g; ++j) {
    const double share = p.gamma(map.generators[static_cast<std::size_t>(j)]);
    map.weights(0, j) = share;
    map.weights(1, j) = 1.0 - share;
  }

  if (options.price_rule == EffectivePriceRule::GammaRatio && !map.sending_surplus) {
    for (BusId k : map.generators) {
      const double share = p.gamma(k);
      if (share > 1e-9 && share < 1.0 - 1e-9) {
        p.alpha2 = costs.alpha(k) / share - share * lambda_s;
        break;
      }
    }
  }
  return p;
}

RldDispatch network_rld(const Network& net, const CostModel& costs, const Forecast& forecast,
                        const ReductionOptions& options) {
  forecast.validate();
  const FlowStructure fs = build_flow_structure(net);
  return network_rld(net, costs, forecast, solve_nda_opf(net, fs, costs, forecast.d_hat), options);
}

RldDispatch network_rld(const Network& net, const CostModel& costs, const Forecast& forecast,
                        const OpfResult& nominal, const ReductionOptions& options) {
  const int n = net.bus_count();
  costs.validate(n);
  forecast.validate();
  if (forecast.size() != n || nominal.generation.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "forecast or nominal size differs from network");

  RldDispatch out;
  out.nominal = nominal;
  out.delta = Eigen::VectorXd::Zero(n);

  if (nominal.congested.size() > 1)
    throw Error(ErrorCode::Unsupported,
                std::to_string(nominal.congested.size()) + " congested lines; at most one is supported");

  if (nominal.congested.size() == 1) {
    out.path = DispatchPath::TwoBus;
    out.reduction = reduce_to_two_bus(net, costs, forecast, nominal, options);
    out.equilibrium = solve_two_bus_equilibrium(*out.reduction);
    out.delta = out.reduction->delta_map.expand(n, out.equilibrium->delta);
    out.price_of_uncertainty = out.equilibrium->price;
    out.saturated = out.equilibrium->saturated;
    return finish(forecast, std::move(out));
  }

  const std::vector<BusId> gens = generating_buses(nominal);
  if (gens.empty()) {
    out.path = DispatchPath::NoGeneration;
    return finish(forecast, std::move(out));
  }
  out.path = DispatchPath::SingleBus;
  const double lambda = nominal.bus_duals(gens.front());
  const double beta = costs.beta.minCoeff();
  if (!(lambda > 0.0) || !(lambda < beta))
    throw Error(ErrorCode::DomainError, "system price must lie in (0, min beta)");
  const double spread = std::sqrt(std::max(0.0, forecast.corr.sum()));
  const double q = normal_isf(lambda / beta);
  double aggregate = spread * q;
  if (std::abs(q) > kDeltaClamp) {
    aggregate = std::copysign(kDeltaClamp * spread, q);
    out.saturated = true;
  }
  for (BusId i : gens) out.delta(i) = aggregate / static_cast<double>(gens.size());
  out.price_of_uncertainty = beta * spread * normal_pdf(q);
  return finish(forecast, std::move(out));
}

const char* to_string(DispatchPath path) {
  switch (path) {
    case DispatchPath::NoGeneration: return "no_generation";
    case DispatchPath::SingleBus: return "single_bus";
    case DispatchPath::TwoBus: return "two_bus";
  }
  return "?";
}

}  // namespace rld
