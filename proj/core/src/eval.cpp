#include "rld/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "rld/error.hpp"
#include "rld/gaussian.hpp"
#include "rld/rng.hpp"

namespace rld {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<BusId> nominal_generators(const OpfResult& nominal) { return generating_buses(nominal); }

struct Settlement {
  const Network* net;
  FlowStructure fs;
};

struct Welford {
  double mean_ = 0.0;
  double m2 = 0.0;
  int count = 0;

  void add(double x) {
    ++count;
    const double d = x - mean_;
    mean_ += d / count;
    m2 += d * (x - mean_);
  }
  double mean() const { return mean_; }
  double stderr_of_mean() const {
    if (count < 2) return 0.0;
    return std::sqrt(m2 / (count - 1) / count);
  }
};

template <typename Fn>
void parallel_for(int count, int threads, Fn&& body) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex guard;
  const int chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Eigen::VectorXd ScenarioBatch::realized(const Forecast& forecast, int scenario) const {
  return forecast.d_hat + forecast.sigma_e * z.row(scenario).transpose();
}

ScenarioBatch sample_scenarios(const Forecast& forecast, std::uint64_t seed, int count) {
  if (count < 1) throw Error(ErrorCode::DomainError, "scenario count must be positive");
  const Eigen::MatrixXd chol = forecast.cholesky();
  const int n = forecast.size();
  ScenarioBatch batch;
  batch.seed = seed;
  batch.z.resize(count, n);
  Eigen::VectorXd u(n);
  for (int s = 0; s < count; ++s) {
    CounterRng rng(seed, static_cast<std::uint64_t>(s));
    for (int j = 0; j < n; ++j) u(j) = rng.normal();
    batch.z.row(s) = (chol * u).transpose();
  }
  return batch;
}

Policy oracle_policy() { return Policy{"oracle", {}, nullptr}; }

Policy rld_policy(ReductionOptions options) {
  return Policy{"rld",
                [options](const Network& net, const FlowStructure& fs, const CostModel& costs,
                          const Forecast& forecast) {
                  const OpfResult nominal = solve_nda_opf(net, fs, costs, forecast.d_hat);
                  return network_rld(net, costs, forecast, nominal, options).g_star;
                },
                nullptr};
}

Eigen::VectorXd three_sigma_schedule(const Network& net, const FlowStructure& fs,
                                     const CostModel& costs, const Forecast& forecast) {
  const OpfResult nominal = solve_nda_opf(net, fs, costs, forecast.d_hat);
  Eigen::VectorXd g = nominal.generation.cwiseMax(0.0);
  const std::vector<BusId> gens = nominal_generators(nominal);
  if (gens.empty()) return g;
  const double reserve = 3.0 * forecast.sigma_e * forecast.corr.diagonal().cwiseMax(0.0).cwiseSqrt().sum();
  for (BusId i : gens) g(i) += reserve / static_cast<double>(gens.size());
  return g;
}

Policy three_sigma_policy() { return Policy{"3sigma", three_sigma_schedule, nullptr}; }

Policy congestion_ignorant_policy() {
  return Policy{"rld_ignore_congestion",
                [](const Network& net, const FlowStructure& fs, const CostModel& costs,
                   const Forecast& forecast) {
                  const OpfResult nominal = solve_nda_opf(net, fs, costs, forecast.d_hat);
                  Eigen::VectorXd g = nominal.generation.cwiseMax(0.0);
                  const std::vector<BusId> gens = nominal_generators(nominal);
                  if (gens.empty()) return g;
                  double alpha = 0.0;
                  for (BusId i : gens) alpha += costs.alpha(i);
                  alpha /= static_cast<double>(gens.size());
                  const double beta = costs.beta.minCoeff();
                  if (!(alpha > 0.0 && alpha < beta))
                    throw Error(ErrorCode::DomainError, "mean generator price must lie in (0, min beta)");
                  const double spread = std::sqrt(std::max(0.0, forecast.corr.sum()));
                  const double reserve = forecast.sigma_e * spread * normal_isf(alpha / beta);
                  for (BusId i : gens) g(i) = std::max(0.0, g(i) + reserve / static_cast<double>(gens.size()));
                  return g;
                },
                nullptr};
}

Policy lower_bound_policy(const Network& net, const CostModel& costs, const Forecast& forecast) {
  const FlowStructure fs = build_flow_structure(net);
  const OpfResult nominal = solve_nda_opf(net, fs, costs, forecast.d_hat);
  const BranchId keep = nominal.congested.empty() ? -1 : nominal.congested.front().branch;
  Policy p = rld_policy();
  p.name = "rld_lower_bound";
  p.settlement = std::make_shared<const Network>(net.with_single_limit(keep));
  return p;
}

const PolicyStats& SigmaReport::policy(const std::string& name) const {
  for (const PolicyStats& p : policies) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::ValidationError, "no policy named " + name);
}

const PriceFit& EvaluationReport::fit(const std::string& name) const {
  for (const PriceFit& f : fits) {
    if (f.policy == name) return f;
  }
  throw Error(ErrorCode::ValidationError, "no fit for policy " + name);
}

SigmaReport evaluate(const Network& net, const FlowStructure& fs, const CostModel& costs,
                     const Forecast& forecast, const std::vector<Policy>& policies,
                     const ScenarioBatch& batch, const EvaluationOptions& options) {
  const int n = net.bus_count();
  forecast.validate();
  costs.validate(n);
  if (policies.empty()) throw Error(ErrorCode::DomainError, "no policies to evaluate");
  if (batch.z.cols() != n || forecast.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "scenario batch does not match the network");

  std::vector<Settlement> settlements{{&net, fs}};
  std::vector<int> where(policies.size(), 0);
  std::vector<Eigen::VectorXd> schedules(policies.size());
  for (std::size_t p = 0; p < policies.size(); ++p) {
    const Policy& policy = policies[p];
    if (policy.settlement) {
      settlements.push_back({policy.settlement.get(), build_flow_structure(*policy.settlement)});
      where[p] = static_cast<int>(settlements.size()) - 1;
    }
    if (!policy.clairvoyant()) {
      Eigen::VectorXd g = policy.schedule(net, fs, costs, forecast);
      if (g.size() != n || !g.allFinite() || (g.array() < -1e-9).any())
        throw Error(ErrorCode::ValidationError, "policy " + policy.name + " returned an invalid schedule");
      schedules[p] = g.cwiseMax(0.0);
    }
  }

  const int count = batch.count();
  const std::size_t np = policies.size();
  std::vector<double> totals(np * static_cast<std::size_t>(count), kNaN);
  std::vector<double> stage2(np * static_cast<std::size_t>(count), kNaN);
  std::vector<double> oracle(settlements.size() * static_cast<std::size_t>(count), kNaN);
  std::vector<char> excluded(static_cast<std::size_t>(count), 0);

  parallel_for(count, options.threads, [&](int begin, int end) {
    std::vector<DispatchSolver> day_ahead;
    std::vector<DispatchSolver> real_time;
    for (const Settlement& st : settlements) {
      day_ahead.emplace_back(*st.net, st.fs, costs.alpha);
      real_time.emplace_back(*st.net, st.fs, costs.beta);
    }
    for (int s = begin; s < end; ++s) {
      const Eigen::VectorXd d = batch.realized(forecast, s);
      try {
        for (std::size_t k = 0; k < settlements.size(); ++k)
          oracle[k * count + s] = day_ahead[k].cost(d);
        for (std::size_t p = 0; p < np; ++p) {
          const std::size_t k = static_cast<std::size_t>(where[p]);
          if (policies[p].clairvoyant()) {
            totals[p * count + s] = oracle[k * count + s];
            stage2[p * count + s] = 0.0;
          } else {
            const double rt = real_time[k].cost(d - schedules[p]);
            stage2[p * count + s] = rt;
            totals[p * count + s] = costs.alpha.dot(schedules[p]) + rt;
          }
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InfeasibleNetwork) throw;
        excluded[static_cast<std::size_t>(s)] = 1;
      }
    }
  });

  SigmaReport report;
  report.sigma = forecast.sigma_e;
  for (char e : excluded) report.excluded_scenarios += e;
  if (report.excluded_scenarios > options.max_excluded_fraction * count)
    throw Error(ErrorCode::InfeasibleNetwork,
                std::to_string(report.excluded_scenarios) + " of " + std::to_string(count) +
                    " scenarios infeasible");

  for (std::size_t p = 0; p < np; ++p) {
    const std::size_t k = static_cast<std::size_t>(where[p]);
    PolicyStats st;
    st.name = policies[p].name;
    Welford total;
    Welford integration;
    double second = 0.0;
    for (int s = 0; s < count; ++s) {
      if (excluded[static_cast<std::size_t>(s)]) {
        if (options.keep_scenario_costs) {
          st.scenario_totals.push_back(kNaN);
          st.scenario_integration.push_back(kNaN);
        }
        continue;
      }
      const double t = totals[p * count + s];
      const double ic = t - oracle[k * count + s];
      total.add(t);
      integration.add(ic);
      second += stage2[p * count + s];
      if (options.keep_scenario_costs) {
        st.scenario_totals.push_back(t);
        st.scenario_integration.push_back(ic);
      }
    }
    st.mean_total = total.mean();
    st.stderr_total = total.stderr_of_mean();
    st.mean_stage2 = total.count > 0 ? second / total.count : 0.0;
    st.mean_stage1 = st.mean_total - st.mean_stage2;
    st.integration_cost = integration.mean();
    st.integration_stderr = integration.stderr_of_mean();
    report.policies.push_back(std::move(st));
  }
  return report;
}

EvaluationReport price_sweep(const Network& net, const FlowStructure& fs, const CostModel& costs,
                             const Forecast& base, const std::vector<double>& sigma_grid,
                             std::uint64_t seed, int count, const std::vector<Policy>& policies,
                             const EvaluationOptions& options) {
  if (sigma_grid.size() < 3) throw Error(ErrorCode::DomainError, "sigma grid needs at least three points");
  for (std::size_t k = 1; k < sigma_grid.size(); ++k) {
    if (!(sigma_grid[k] > sigma_grid[k - 1]))
      throw Error(ErrorCode::DomainError, "sigma grid must be strictly ascending");
  }
  EvaluationReport report;
  report.seed = seed;
  report.scenarios = count;
  report.sigma_grid = sigma_grid;
  const ScenarioBatch batch = sample_scenarios(base, seed, count);
  EvaluationOptions inner = options;
  inner.keep_scenario_costs = true;
  for (double sigma : sigma_grid) {
    report.by_sigma.push_back(evaluate(net, fs, costs, base.with_sigma(sigma), policies, batch, inner));
  }

  double s2 = 0.0;
  for (double s : sigma_grid) s2 += s * s;
  const double k = static_cast<double>(sigma_grid.size());
  double xbar = 0.0;
  for (double s : sigma_grid) xbar += s / k;
  double sxx = 0.0;
  for (double s : sigma_grid) sxx += (s - xbar) * (s - xbar);

  for (std::size_t p = 0; p < policies.size(); ++p) {
    PriceFit fit;
    fit.policy = policies[p].name;
    double sxy = 0.0;
    std::vector<double> ic;
    for (const SigmaReport& r : report.by_sigma) ic.push_back(r.policies[p].integration_cost);
    for (std::size_t j = 0; j < ic.size(); ++j) fit.slope += sigma_grid[j] * ic[j] / s2;

    Welford per_scenario;
    for (int s = 0; s < count; ++s) {
      double slope = 0.0;
      for (std::size_t j = 0; j < sigma_grid.size(); ++j)
        slope += sigma_grid[j] * report.by_sigma[j].policies[p].scenario_integration[static_cast<std::size_t>(s)] / s2;
      if (std::isfinite(slope)) per_scenario.add(slope);
    }
    fit.half_width = 1.96 * per_scenario.stderr_of_mean();

    double ybar = 0.0;
    for (double y : ic) ybar += y / k;
    for (std::size_t j = 0; j < ic.size(); ++j) sxy += (sigma_grid[j] - xbar) * (ic[j] - ybar);
    fit.free_slope = sxy / sxx;
    fit.free_intercept = ybar - fit.free_slope * xbar;
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t j = 0; j < ic.size(); ++j) {
      const double pred = fit.free_intercept + fit.free_slope * sigma_grid[j];
      ss_res += (ic[j] - pred) * (ic[j] - pred);
      ss_tot += (ic[j] - ybar) * (ic[j] - ybar);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    report.fits.push_back(fit);
  }

  if (!options.keep_scenario_costs) {
    for (SigmaReport& r : report.by_sigma) {
      for (PolicyStats& st : r.policies) {
        st.scenario_totals = {};
        st.scenario_integration = {};
      }
    }
  }
  return report;
}

}  // namespace rld
