#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "rld/dispatch.hpp"
#include "rld/error.hpp"
#include "rld/eval.hpp"

namespace rld::cli {

namespace {

const std::vector<std::string> kDefaultPolicies{"oracle", "rld", "3sigma"};

struct Prepared {
  CaseFile c;
  FlowStructure fs;
  std::uint64_t seed;
  int scenarios;
};

Prepared prepare(const CaseFile& original, const CommandOptions& o) {
  Prepared p{original, build_flow_structure(original.network), original.defaults.seed,
             original.defaults.scenarios};
  if (o.beta_ratio) apply_beta_ratio(p.c, *o.beta_ratio);
  if (o.sigma) {
    if (!(*o.sigma >= 0.0)) throw Error(ErrorCode::ValidationError, "--sigma must be nonnegative");
    p.c.forecast.sigma_e = *o.sigma;
  }
  if (o.seed) p.seed = *o.seed;
  if (o.scenarios) {
    if (*o.scenarios < 1) throw Error(ErrorCode::ValidationError, "--scenarios must be positive");
    p.scenarios = *o.scenarios;
  }
  if (o.threads < 1) throw Error(ErrorCode::ValidationError, "--threads must be positive");
  return p;
}

std::string preamble(std::string_view command, const Prepared& p, const CommandOptions& o) {
  std::ostringstream out;
  out << "# rld-dispatch " << RLD_VERSION << " command=" << command << " case=" << o.case_label
      << " seed=" << p.seed << " scenarios=" << p.scenarios << '\n';
  return out.str();
}

std::vector<Policy> make_policies(const Prepared& p, const CommandOptions& o) {
  const std::vector<std::string>& names = o.policies.empty() ? kDefaultPolicies : o.policies;
  std::vector<Policy> out;
  for (const std::string& name : names) {
    if (name == "oracle") out.push_back(oracle_policy());
    else if (name == "rld") out.push_back(rld_policy());
    else if (name == "3sigma") out.push_back(three_sigma_policy());
    else if (name == "rld_ignore_congestion") out.push_back(congestion_ignorant_policy());
    else if (name == "rld_lower_bound") out.push_back(lower_bound_policy(p.c.network, p.c.costs, p.c.forecast));
    else throw Error(ErrorCode::ValidationError, "unknown policy '" + name + "'");
  }
  return out;
}

EvaluationOptions eval_options(const CommandOptions& o) {
  EvaluationOptions e;
  e.threads = o.threads;
  return e;
}

}  // namespace

std::vector<double> parse_sigma_grid(std::string_view spec) {
  double parts[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t end = i < 2 ? spec.find(':', pos) : spec.size();
    if (end == std::string_view::npos)
      throw Error(ErrorCode::ValidationError, "--sigma-grid expects a:b:step");
    const std::string_view field = spec.substr(pos, end - pos);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), parts[i]);
    if (ec != std::errc() || ptr != field.data() + field.size())
      throw Error(ErrorCode::ValidationError, "--sigma-grid has a malformed number '" + std::string(field) + "'");
    pos = end + 1;
  }
  try {
    return expand_grid(parts[0], parts[1], parts[2]);
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationError, e.what());
  }
}

void apply_beta_ratio(CaseFile& c, double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw Error(ErrorCode::ValidationError, "--beta-ratio must be positive");
  Eigen::VectorXd& alpha = c.costs.alpha;
  Eigen::VectorXd& beta = c.costs.beta;
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < alpha.size(); ++i) {
    if (alpha(i) < beta(i)) {
      sum += alpha(i);
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::ValidationError, "no bus has a day-ahead price below its real-time price");
  const double new_beta = ratio * sum / count;
  for (int i = 0; i < alpha.size(); ++i) {
    if (alpha(i) >= beta(i)) alpha(i) = new_beta;
    beta(i) = new_beta;
  }
  c.costs.validate(static_cast<int>(alpha.size()));
}

std::string format_value(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  std::string s = buf;
  if (s == "-0") s = "0";
  return s;
}

std::string cmd_nda(const CaseFile& original, const CommandOptions& o) {
  const Prepared p = prepare(original, o);
  const Network& net = p.c.network;
  const OpfResult res = solve_nda_opf(net, p.fs, p.c.costs, p.c.forecast.d_hat);
  std::ostringstream out;
  out << preamble("nda", p, o);
  out << "element,id,from,to,value,dual,congested\n";
  for (int i = 0; i < net.bus_count(); ++i) {
    out << "bus," << i + 1 << ",,," << format_value(res.generation(i)) << ',' << format_value(res.bus_duals(i))
        << ",\n";
  }
  for (BranchId k = 0; k < net.branch_count(); ++k) {
    const Branch& br = net.branch(k);
    std::string congested;
    for (const CongestedBranch& cb : res.congested) {
      if (cb.branch == k) congested = std::to_string(cb.sending(net) + 1) + "->" + std::to_string(cb.receiving(net) + 1);
    }
    const double mu = res.congestion_duals_forward(k) - res.congestion_duals_backward(k);
    out << "branch," << k + 1 << ',' << br.from + 1 << ',' << br.to + 1 << ',' << format_value(res.flows(k)) << ','
        << format_value(mu) << ',' << congested << '\n';
  }
  out << "cost,,,," << format_value(res.cost) << ",,\n";
  return out.str();
}

std::string cmd_rld(const CaseFile& original, const CommandOptions& o) {
  const Prepared p = prepare(original, o);
  const Network& net = p.c.network;
  const RldDispatch d = network_rld(net, p.c.costs, p.c.forecast);
  std::ostringstream out;
  out << preamble("rld", p, o);
  out << "bus,nominal_mw,g_star_mw,delta,gamma,nodal_price,path,price_of_uncertainty,"
         "reduced_alpha1,reduced_alpha2,reduced_delta1,reduced_delta2,saturated\n";
  for (int i = 0; i < net.bus_count(); ++i) {
    out << i + 1 << ',' << format_value(d.nominal.generation(i)) << ',' << format_value(d.g_star(i)) << ','
        << format_value(d.delta(i)) << ',';
    if (d.reduction) out << format_value(d.reduction->gamma(i));
    out << ',' << format_value(d.nominal.bus_duals(i)) << ',' << to_string(d.path) << ','
        << format_value(d.price_of_uncertainty) << ',';
    if (d.reduction && d.equilibrium) {
      out << format_value(d.reduction->alpha1) << ',' << format_value(d.reduction->alpha2) << ','
          << format_value(d.equilibrium->delta(0)) << ',' << format_value(d.equilibrium->delta(1)) << ',';
    } else {
      out << ",,,,";
    }
    out << (d.saturated ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string cmd_evaluate(const CaseFile& original, const CommandOptions& o) {
  const Prepared p = prepare(original, o);
  const std::vector<double> sigmas = o.sigma_grid ? *o.sigma_grid : std::vector<double>{p.c.forecast.sigma_e};
  const std::vector<Policy> policies = make_policies(p, o);
  const ScenarioBatch batch = sample_scenarios(p.c.forecast, p.seed, p.scenarios);
  std::ostringstream out;
  out << preamble("evaluate", p, o);
  out << "sigma,policy,mean_cost,stderr,stage1_cost,stage2_cost,integration_cost,integration_stderr\n";
  for (double sigma : sigmas) {
    const SigmaReport r = evaluate(p.c.network, p.fs, p.c.costs, p.c.forecast.with_sigma(sigma), policies, batch,
                                   eval_options(o));
    for (const PolicyStats& st : r.policies) {
      out << format_value(sigma) << ',' << st.name << ',' << format_value(st.mean_total) << ','
          << format_value(st.stderr_total) << ',' << format_value(st.mean_stage1) << ','
          << format_value(st.mean_stage2) << ',' << format_value(st.integration_cost) << ','
          << format_value(st.integration_stderr) << '\n';
    }
  }
  return out.str();
}

std::string cmd_price(const CaseFile& original, const CommandOptions& o) {
  const Prepared p = prepare(original, o);
  const std::vector<double> grid = o.sigma_grid ? *o.sigma_grid : p.c.defaults.sigma_grid();
  const std::vector<Policy> policies = make_policies(p, o);
  const EvaluationReport report = price_sweep(p.c.network, p.fs, p.c.costs, p.c.forecast, grid, p.seed,
                                              p.scenarios, policies, eval_options(o));

  std::optional<double> analytic_rld;
  try {
    analytic_rld = network_rld(p.c.network, p.c.costs, p.c.forecast.with_sigma(1.0)).price_of_uncertainty;
  } catch (const Error&) {
  }

  std::ostringstream out;
  out << preamble("price", p, o);
  out << "policy,sigma,integration_cost,integration_stderr,fitted_price,fitted_half_width,r_squared,"
         "analytic_price\n";
  for (std::size_t k = 0; k < policies.size(); ++k) {
    const PriceFit& fit = report.fits[k];
    std::string analytic;
    if (policies[k].clairvoyant()) analytic = "0";
    else if (policies[k].name == "rld" && analytic_rld) analytic = format_value(*analytic_rld);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const PolicyStats& st = report.by_sigma[j].policies[k];
      out << st.name << ',' << format_value(grid[j]) << ',' << format_value(st.integration_cost) << ','
          << format_value(st.integration_stderr) << ',' << format_value(fit.slope) << ','
          << format_value(fit.half_width) << ',' << format_value(fit.r_squared) << ',' << analytic << '\n';
    }
  }
  return out.str();
}

std::string run_command(std::string_view command, const std::string& case_path, CommandOptions o) {
  const CaseFile c = parse_case(case_path);
  o.case_label = std::filesystem::path(case_path).filename().string();
  if (command == "nda") return cmd_nda(c, o);
  if (command == "rld") return cmd_rld(c, o);
  if (command == "evaluate") return cmd_evaluate(c, o);
  if (command == "price") return cmd_price(c, o);
  throw Error(ErrorCode::ValidationError, "unknown command '" + std::string(command) + "'");
}

}  // namespace rld::cli
