// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "rld/brute_force.hpp"
#include "rld/case_file.hpp"
#include "rld/dispatch.hpp"
#include "rld/error.hpp"
#include "rld/eval.hpp"
#include "rld/gaussian.hpp"
#include "rld/lp.hpp"
#include "rld/single_bus.hpp"
#include "rld/two_bus.hpp"

namespace {

using namespace rld;

std::string data(const std::string& name) { return std::string(RLD_DATA_DIR) + "/" + name; }

struct Check {
  bool ok = true;
  std::ostringstream note;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      note << what << "; ";
      ok = false;
    }
  }
};

struct Stats {
  double mean = 0.0;
  double se = 0.0;
};

Stats stats(const std::vector<double>& x) {
  double m = 0.0;
  double m2 = 0.0;
  double k = 0.0;
  for (double v : x) {
    k += 1.0;
    const double d = v - m;
    m += d / k;
    m2 += d * (v - m);
  }
  return {m, k > 1.0 ? std::sqrt(m2 / (k - 1.0) / k) : 0.0};
}

Stats paired(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return stats(d);
}

std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string f;
  while (std::getline(in, f, ',')) out.push_back(f);
  return out;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// AC1
Check nine_bus_nominal() {
  Check c;
  const std::string csv = cli::run_command("nda", data("case9.grid"), {});
  const double gen[3] = {86.6, 134.4, 94.1};
  const double flows[9] = {86.56, 33.74, -56.26, 94.06, 37.80, -62.20, -134.38, 72.17, -52.83};
  std::stringstream in(csv);
  std::string line;
  double worst = 0.0;
  int seen = 0;
  while (std::getline(in, line)) {
    const auto f = csv_fields(line);
    if (f.size() < 5) continue;
    if (f[0] == "bus") {
      const int id = std::stoi(f[1]);
      const double expect = id <= 3 ? gen[id - 1] : 0.0;
      worst = std::max(worst, std::abs(std::stod(f[4]) - expect));
      ++seen;
    } else if (f[0] == "branch") {
      worst = std::max(worst, std::abs(std::stod(f[4]) - flows[std::stoi(f[1]) - 1]));
      ++seen;
    }
  }
  c.require(seen == 18, "expected 9 bus and 9 branch rows");
  c.require(worst <= 0.1, fmt("largest deviation %.4f MW", worst));
  c.note << (c.ok ? fmt("largest deviation %.4f MW", worst) : "");
  return c;
}

// AC2
Check single_bus_slope() {
  Check c;
  const CaseFile cf = parse_case(data("single_bus.grid"));
  const FlowStructure fs = build_flow_structure(cf.network);
  std::vector<double> grid;
  for (int s = 2; s <= 20; s += 2) grid.push_back(s);
  const EvaluationReport rep =
      price_sweep(cf.network, fs, cf.costs, cf.forecast, grid, 2024, 100000, {oracle_policy(), rld_policy()});
  const double analytic = 2.0 * normal_pdf(normal_isf(0.5));
  const double fitted = rep.fit("rld").slope;
  const double rel = std::abs(fitted - analytic) / analytic;
  c.require(std::abs(analytic - 0.79788) < 1e-5, "analytic price differs from 0.79788");
  c.require(rel <= 0.02, fmt("relative error %.4f", rel));
  c.note << fmt("fitted %.5f vs analytic %.5f (%.2f%%)", fitted, analytic, 100.0 * rel);
  return c;
}

// AC3
Check price_curve_shape() {
  Check c;
  const double beta = 1.0;
  std::vector<double> ratios{0.01};
  for (int k = 1; k <= 9; ++k) ratios.push_back(k / 10.0);
  ratios.push_back(0.99);
  for (double r : ratios) c.require(price_of_uncertainty_single(r * beta, beta) > 0.0, fmt("p(%.2f) <= 0", r));
  const double lo = price_of_uncertainty_single(0.01, beta);
  const double mid = price_of_uncertainty_single(0.5, beta);
  const double hi = price_of_uncertainty_single(0.99, beta);
  c.require(lo < mid && mid > hi, "no interior peak");
  c.require(lo < 0.05 * beta && hi < 0.05 * beta, "endpoint values not small");
  c.note << fmt("p(0.01)=%.4f p(0.5)=%.4f p(0.99)=%.4f", lo, mid, hi);
  return c;
}

// AC4
Check two_bus_certification() {
  Check c;
  const Network net(2, {{0, 1, 1.0, 100.0}});
  const FlowStructure fs = build_flow_structure(net);
  CostModel costs;
  costs.alpha = Eigen::Vector2d(0.5, 0.5);
  costs.beta = Eigen::Vector2d(1.0, 1.0);
  OpfResult nominal = solve_nda_opf(net, fs, costs, Eigen::Vector2d(0.0, 200.0));
  nominal.generation = Eigen::Vector2d(100.0, 100.0);
  nominal.flows = Eigen::VectorXd::Constant(1, 100.0);
  nominal.congested = {{0, 1}};
  nominal.bus_duals = Eigen::Vector2d(0.5, 0.5);
  for (double rho : {-0.5, 0.0, 0.5}) {
    Forecast f = Forecast::iid(Eigen::Vector2d(0.0, 200.0), 1.0);
    f.corr << 1.0, rho, rho, 1.0;
    const RldDispatch d = network_rld(net, costs, f, nominal);
    const double residual = d.equilibrium->residual.cwiseAbs().maxCoeff();
    BruteForceOptions opts;
    opts.nominal = nominal.generation;
    const ScenarioBatch batch = sample_scenarios(f, 77, 1000000);
    const BruteForceResult bf = brute_force_two_stage(net, fs, costs, f, batch, opts);
    const double gap = (bf.delta - d.delta).cwiseAbs().maxCoeff();
    c.require(residual <= 1e-7, fmt("rho %.1f residual %.2e", rho, residual));
    c.require(gap <= 0.01 + 1e-9, fmt("rho %.1f grid gap %.4f", rho, gap));
    c.require(!bf.grid_too_coarse, fmt("rho %.1f search box too small", rho));
    // With equal prices the objective is flat along fixed delta1 + delta2,
    // so the totals and costs are what the two methods can agree on.
    const SampleAverageObjective objective(net, fs, costs, f, batch, nominal.generation);
    const double sum_gap = std::abs(bf.delta.sum() - d.delta.sum());
    const double cost_gap = objective(d.delta) - bf.cost;
    c.note << fmt("rho %.1f: eq (%.3f, %.3f)", rho, d.delta(0), d.delta(1))
           << fmt(" grid (%.2f, %.2f)", bf.delta(0), bf.delta(1)) << fmt(" sum gap %.3f cost gap %.1e; ", sum_gap, cost_gap);
  }
  return c;
}

// AC5
Check backflow_ratio() {
  Check c;
  const double alpha = 0.5;
  const double beta = 1.0;
  const int samples = 400000;
  double prev_ratio = -1.0;
  double prev_mc = -1.0;
  double prev_se = 0.0;
  for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    TwoBusProblem p;
    p.alpha1 = p.alpha2 = alpha;
    p.beta1 = p.beta2 = beta;
    p.cov << 1.0, rho, rho, 1.0;
    p.delta_map.generators = {0, 1};
    p.delta_map.weights = Eigen::Matrix2d::Identity();
    const EquilibriumSolution eq = solve_two_bus_equilibrium(p);
    const double ratio = eq.price / isolated_price(p);

    // Simulated integration cost of both dispatches on the same errors.
    const double iso = normal_isf(alpha / beta);
    std::mt19937_64 gen(static_cast<std::uint64_t>(1000 + 10 * rho));
    std::normal_distribution<double> z;
    std::vector<double> with(samples);
    std::vector<double> without(samples);
    const double s = std::sqrt(1.0 - rho * rho);
    for (int k = 0; k < samples; ++k) {
      const double z1 = z(gen);
      const double z2 = rho * z1 + s * z(gen);
      const double s1 = z1 - eq.delta(0);
      const double s2 = z2 - eq.delta(1);
      // Only power flowing back toward bus 1 is available in real time.
      const double back = std::max(0.0, std::min(s1, -s2));
      with[static_cast<std::size_t>(k)] = alpha * (eq.delta(0) + eq.delta(1) - z1 - z2) +
                                          beta * (std::max(0.0, s1 - back) + std::max(0.0, s2 + back));
      without[static_cast<std::size_t>(k)] =
          alpha * (2.0 * iso - z1 - z2) + beta * (std::max(0.0, z1 - iso) + std::max(0.0, z2 - iso));
    }
    const Stats a = stats(with);
    const Stats b = stats(without);
    const Stats diff = paired(with, without);
    const double mc = a.mean / b.mean;
    const double se = std::abs(diff.se / b.mean);
    c.require(ratio <= 1.0 + 1e-12, fmt("rho %.1f analytic ratio %.4f > 1", rho, ratio));
    c.require(mc <= 1.0 + 3.0 * se, fmt("rho %.1f simulated ratio %.4f > 1", rho, mc));
    c.require(std::abs(mc - ratio) <= 3.0 * se + 1e-3, fmt("rho %.1f simulation disagrees", rho));
    if (prev_ratio >= 0.0) {
      c.require(ratio >= prev_ratio - 1e-12, fmt("analytic ratio drops at rho %.1f", rho));
      c.require(mc >= prev_mc - 3.0 * std::hypot(se, prev_se), fmt("simulated ratio drops at rho %.1f", rho));
    }
    prev_ratio = ratio;
    prev_mc = mc;
    prev_se = se;
    c.note << fmt("rho %.1f: %.4f (sim %.4f); ", rho, ratio, mc);
  }
  return c;
}

// Six buses on one cycle with a single finite line; true when exactly one line congests.
bool single_cycle(std::mt19937& gen, Network& net, CostModel& costs, Eigen::VectorXd& d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Branch> branches;
  for (int i = 0; i < 6; ++i) branches.push_back({i, (i + 1) % 6, 0.5 + 4.0 * u(gen), kUnbounded});
  branches[0].capacity = 5.0 + 30.0 * u(gen);
  net = Network(6, branches);
  costs.alpha.resize(6);
  costs.beta = Eigen::VectorXd::Constant(6, 10.0);
  d.resize(6);
  for (int i = 0; i < 6; ++i) {
    costs.alpha(i) = 1.0 + 5.0 * u(gen);
    d(i) = 60.0 * u(gen) - 10.0;
  }
  return solve_nda_opf(net, build_flow_structure(net), costs, d).congested.size() == 1;
}

// AC6
Check gamma_weights_check() {
  Check c;
  const Network ring(3, {{0, 1, 1.0, 1.0}, {0, 2, 1.0, kUnbounded}, {1, 2, 1.0, kUnbounded}});
  const double g3 = gamma_weights(build_flow_structure(ring, 0, 0), 0, 1)(2);
  c.require(std::abs(g3 - 0.5) <= 1e-10, fmt("ring gamma %.12f", g3));

  std::mt19937 gen(2718);
  int instances = 0;
  double worst_dual = 0.0;
  double worst_range = 0.0;
  for (int trial = 0; trial < 2000 && instances < 100; ++trial) {
    Network net(1, {});
    CostModel costs;
    Eigen::VectorXd d;
    if (!single_cycle(gen, net, costs, d)) continue;
    ++instances;
    const OpfResult r = solve_nda_opf(net, build_flow_structure(net), costs, d);
    const CongestedBranch line = r.congested.front();
    const BusId s = line.sending(net);
    const BusId t = line.receiving(net);
    const Eigen::VectorXd g = gamma_weights(build_flow_structure(net, s, line.branch), s, t);
    for (int i = 0; i < 6; ++i) {
      worst_range = std::max({worst_range, -g(i), g(i) - 1.0});
      worst_dual = std::max(worst_dual,
                            std::abs(r.bus_duals(i) - g(i) * r.bus_duals(s) - (1.0 - g(i)) * r.bus_duals(t)));
    }
  }
  c.require(instances >= 50, "too few single-congestion instances");
  c.require(worst_range <= 1e-12, fmt("gamma outside [0,1] by %.2e", worst_range));
  c.require(worst_dual <= 1e-6, fmt("dual decomposition error %.2e", worst_dual));
  c.note << fmt("ring gamma %.12f; %g instances, dual error %.2e", g3, instances, worst_dual);
  return c;
}

// AC7
Check congested_ordering() {
  Check c;
  CaseFile cf = parse_case(data("case9_congested.grid"));
  cli::apply_beta_ratio(cf, 1.5);
  const FlowStructure fs = build_flow_structure(cf.network);
  const std::vector<double> grid = expand_grid(5, 40, 5);
  const std::vector<Policy> policies{oracle_policy(), rld_policy(), three_sigma_policy(), congestion_ignorant_policy(),
                                     lower_bound_policy(cf.network, cf.costs, cf.forecast)};
  const EvaluationReport rep = price_sweep(cf.network, fs, cf.costs, cf.forecast, grid, 1, 100000, policies);
  double worst_gap = 0.0;
  for (const SigmaReport& r : rep.by_sigma) {
    const PolicyStats& oracle = r.policy("oracle");
    const PolicyStats& rld = r.policy("rld");
    const PolicyStats& three = r.policy("3sigma");
    const PolicyStats& blind = r.policy("rld_ignore_congestion");
    const PolicyStats& lower = r.policy("rld_lower_bound");
    const Stats over_oracle = paired(rld.scenario_totals, oracle.scenario_totals);
    const Stats under_three = paired(three.scenario_totals, rld.scenario_totals);
    const Stats vs_blind = paired(blind.scenario_totals, rld.scenario_totals);
    c.require(over_oracle.mean >= -3.0 * over_oracle.se, fmt("sigma %g: RLD below oracle", r.sigma));
    c.require(under_three.mean >= -3.0 * under_three.se, fmt("sigma %g: 3-sigma below RLD", r.sigma));
    c.require(vs_blind.mean >= -3.0 * vs_blind.se, fmt("sigma %g: congestion-ignorant RLD cheaper", r.sigma));
    const double gap = std::abs(rld.mean_total - lower.mean_total) / lower.mean_total;
    worst_gap = std::max(worst_gap, gap);
    c.require(gap <= 0.03, fmt("sigma %g: %.2f%% above lower bound", r.sigma, 100.0 * gap));
  }
  const PriceFit& fit = rep.fit("rld");
  c.require(fit.r_squared >= 0.99, fmt("R^2 %.4f", fit.r_squared));
  c.note << fmt("RLD price %.4f, R^2 %.5f, worst gap to lower bound %.3f%%", fit.slope, fit.r_squared,
                100.0 * worst_gap);
  return c;
}

// AC8
Check oracle_flatness() {
  Check c;
  const CaseFile cf = parse_case(data("case9.grid"));
  const FlowStructure fs = build_flow_structure(cf.network);
  double alpha_bar = 0.0;
  int gens = 0;
  for (int i = 0; i < cf.network.bus_count(); ++i) {
    if (cf.costs.alpha(i) < cf.costs.beta(i)) {
      alpha_bar += cf.costs.alpha(i);
      ++gens;
    }
  }
  alpha_bar /= gens;
  const double target = 315.0 * alpha_bar;
  const ScenarioBatch batch = sample_scenarios(cf.forecast, 1, 100000);
  std::vector<double> grid = expand_grid(1, 40, 5);
  grid.push_back(40.0);
  double worst = 0.0;
  for (double sigma : grid) {
    const SigmaReport r = evaluate(cf.network, fs, cf.costs, cf.forecast.with_sigma(sigma), {oracle_policy()}, batch);
    const double dev = std::abs(r.policies[0].mean_total - target) / target;
    worst = std::max(worst, dev);
    c.require(dev <= 0.005, fmt("sigma %g: mean %.3f", sigma, r.policies[0].mean_total));
  }
  c.note << fmt("largest deviation from %.1f: %.3f%%", target, 100.0 * worst);
  return c;
}

// AC9
Check property_suites() {
  Check c;

  // LP strong duality.
  {
    std::mt19937 gen(31337);
    std::normal_distribution<double> z;
    std::uniform_int_distribution<int> dim(2, 12);
    double worst = 0.0;
    int solved = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const int n = dim(gen);
      const int neq = dim(gen) % (n / 2 + 1);
      const int nin = dim(gen);
      Eigen::VectorXd x0(n);
      for (int j = 0; j < n; ++j) x0(j) = std::abs(z(gen));
      LinearProgram lp(n);
      for (int j = 0; j < n; ++j) lp.objective(j) = z(gen);
      lp.eq_matrix.resize(neq, n);
      for (int i = 0; i < neq; ++i)
        for (int j = 0; j < n; ++j) lp.eq_matrix(i, j) = z(gen);
      lp.eq_rhs = lp.eq_matrix * x0;
      lp.ineq_matrix.resize(nin + n, n);
      for (int i = 0; i < nin; ++i)
        for (int j = 0; j < n; ++j) lp.ineq_matrix(i, j) = z(gen);
      lp.ineq_matrix.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
      lp.ineq_rhs.resize(nin + n);
      lp.ineq_rhs.head(nin) = lp.ineq_matrix.topRows(nin) * x0 + Eigen::VectorXd::Constant(nin, 0.5);
      lp.ineq_rhs.tail(n) = x0 + Eigen::VectorXd::Constant(n, 5.0);
      const LpSolution s = solve_lp(lp);
      if (s.status != LpStatus::Optimal) continue;
      ++solved;
      worst = std::max(worst, std::abs(dual_objective(lp, s) - s.objective_value) / (1.0 + std::abs(s.objective_value)));
    }
    c.require(solved == 200, "LP failed on a feasible bounded instance");
    c.require(worst <= 1e-8, fmt("duality gap %.2e", worst));
    c.note << fmt("duality gap %.1e; ", worst);
  }

  // Gradient of the simulated two-stage cost at the equilibrium.
  {
    const Network net(2, {{0, 1, 1.0, 100.0}});
    const FlowStructure fs = build_flow_structure(net);
    CostModel costs;
    costs.alpha = Eigen::Vector2d(0.4, 0.6);
    costs.beta = Eigen::Vector2d(1.0, 1.0);
    Forecast f = Forecast::iid(Eigen::Vector2d(0.0, 200.0), 1.0);
    f.corr << 1.0, -0.3, -0.3, 1.0;
    const RldDispatch d = network_rld(net, costs, f);
    const RecourseFunction rec(net, fs, costs.beta);
    const ScenarioBatch batch = sample_scenarios(f, 5, 1000000);
    const double h = 0.05;
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
      const Eigen::VectorXd up = (d.nominal.generation + d.delta + h * Eigen::VectorXd::Unit(2, k)).cwiseMax(0.0);
      const Eigen::VectorXd down = (d.nominal.generation + d.delta - h * Eigen::VectorXd::Unit(2, k)).cwiseMax(0.0);
      std::vector<double> slope(static_cast<std::size_t>(batch.count()));
      for (int s = 0; s < batch.count(); ++s) {
        const Eigen::VectorXd dem = batch.realized(f, s);
        const double cu = costs.alpha.dot(up) + rec(dem - up);
        const double cd = costs.alpha.dot(down) + rec(dem - down);
        slope[static_cast<std::size_t>(s)] = (cu - cd) / (2.0 * h);
      }
      const Stats g = stats(slope);
      worst = std::max(worst, std::abs(g.mean) / g.se);
      c.require(std::abs(g.mean) <= 3.0 * g.se, fmt("gradient component %g is %.4f", k, g.mean));
    }
    c.note << fmt("gradient within %.2f SE; ", worst);
  }

  // Kirchhoff structure.
  {
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> b(0.5, 20.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 3 + trial % 10;
      std::vector<Branch> branches;
      for (int i = 1; i < n; ++i) branches.push_back({static_cast<int>(gen() % static_cast<unsigned>(i)), i, b(gen)});
      for (int extra = 0; extra < 1 + trial % 4; ++extra) {
        const int u = static_cast<int>(gen() % static_cast<unsigned>(n));
        const int v = (u + 1 + static_cast<int>(gen() % static_cast<unsigned>(n - 1))) % n;
        branches.push_back({u, v, b(gen)});
      }
      const FlowStructure fs = build_flow_structure(Network(n, branches));
      worst = std::max(worst, (fs.cycle_matrix * fs.flow_basis).cwiseAbs().maxCoeff());
      worst = std::max(worst, (fs.incidence * fs.flow_basis - fs.injection_map).cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(fs.injection_map.colwise().sum().maxCoeff()));
    }
    c.require(worst <= 1e-10, fmt("Kirchhoff residual %.2e", worst));
    c.note << fmt("Kirchhoff residual %.1e; ", worst);
  }

  // Perturbation invariant to sigma.
  {
    const CaseFile cf = parse_case(data("case9_congested.grid"));
    const RldDispatch base = network_rld(cf.network, cf.costs, cf.forecast.with_sigma(1.0));
    double worst = 0.0;
    for (double sigma : {2.0, 5.0}) {
      const RldDispatch d = network_rld(cf.network, cf.costs, cf.forecast.with_sigma(sigma));
      worst = std::max(worst, (d.delta - base.delta).cwiseAbs().maxCoeff());
      worst = std::max(worst, (d.g_star - d.nominal.generation - sigma * base.delta).cwiseAbs().maxCoeff() / sigma);
    }
    c.require(worst <= 1e-12, fmt("sigma equivariance error %.2e", worst));
  }

  // Bit-identical reports across thread counts.
  {
    const CaseFile cf = parse_case(data("case9_congested.grid"));
    const FlowStructure fs = build_flow_structure(cf.network);
    const Forecast f = cf.forecast.with_sigma(20.0);
    const ScenarioBatch batch = sample_scenarios(f, 3, 20000);
    const std::vector<Policy> policies{oracle_policy(), rld_policy(), three_sigma_policy()};
    EvaluationOptions opts;
    opts.keep_scenario_costs = true;
    const SigmaReport one = evaluate(cf.network, fs, cf.costs, f, policies, batch, opts);
    bool same = true;
    for (int threads : {2, 4}) {
      opts.threads = threads;
      const SigmaReport many = evaluate(cf.network, fs, cf.costs, f, policies, batch, opts);
      for (std::size_t k = 0; k < policies.size(); ++k) {
        same = same && many.policies[k].mean_total == one.policies[k].mean_total &&
               many.policies[k].stderr_total == one.policies[k].stderr_total &&
               many.policies[k].integration_cost == one.policies[k].integration_cost &&
               many.policies[k].scenario_totals == one.policies[k].scenario_totals;
      }
    }
    c.require(same, "reports differ across thread counts");
  }
  if (c.ok) c.note << "equivariance and thread determinism hold";
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    std::function<Check()> run;
    double limit_s;
  };
  const std::vector<Criterion> criteria{
      {"AC1", "nine-bus nominal dispatch", nine_bus_nominal, 1.0},
      {"AC2", "single-bus price slope", single_bus_slope, 30.0},
      {"AC3", "price curve shape", price_curve_shape, 1.0},
      {"AC4", "two-bus equilibrium against grid search", two_bus_certification, 120.0},
      {"AC5", "backflow price ratio", backflow_ratio, 60.0},
      {"AC6", "gamma weights", gamma_weights_check, 60.0},
      {"AC7", "congested nine-bus ordering", congested_ordering, 300.0},
      {"AC8", "oracle flatness", oracle_flatness, 120.0},
      {"AC9", "property suites", property_suites, 300.0},
  };
  int failures = 0;
  for (const Criterion& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check c;
    try {
      c = cr.run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.note << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > cr.limit_s) c.require(false, fmt("took %.1f s, limit %.0f s", secs, cr.limit_s));
    failures += !c.ok;
    std::printf("%s %s %s | %s | %.2f s\n", cr.id, c.ok ? "PASS" : "FAIL", cr.title, c.note.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
