#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "rld/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Risk-limiting dispatch on DC networks", "rld-dispatch"};
  app.require_subcommand(1);

  std::string case_path;
  std::string out_path;
  std::string sigma_grid;
  std::string policies;
  rld::cli::CommandOptions opts;
  std::uint64_t seed = 0;
  int scenarios = 0;
  double sigma = 0.0;
  double beta_ratio = 0.0;

  const std::pair<const char*, const char*> commands[] = {
      {"nda", "Nominal day-ahead dispatch, flows and prices"},
      {"rld", "Risk-limiting dispatch and analytic price of uncertainty"},
      {"evaluate", "Monte Carlo cost of dispatch policies"},
      {"price", "Integration cost against sigma and fitted price of uncertainty"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("case", case_path, "Case file")->required();
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--scenarios", scenarios, "Scenario count");
    sub->add_option("--sigma", sigma, "Forecast error scale");
    sub->add_option("--sigma-grid", sigma_grid, "Sigma sweep a:b:step");
    sub->add_option("--beta-ratio", beta_ratio, "Real-time price as a multiple of the mean day-ahead price");
    sub->add_option("--policies", policies, "Comma separated: oracle,rld,3sigma,rld_ignore_congestion,rld_lower_bound");
    sub->add_option("--threads", opts.threads, "Worker threads");
    sub->add_option("--out", out_path, "Output CSV path (default stdout)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR UsageError: " << e.what() << '\n';
    return 64;
  }

  CLI::App* chosen = app.get_subcommands().front();
  auto given = [&](const char* flag) { return chosen->count(flag) > 0; };
  if (given("--seed")) opts.seed = seed;
  if (given("--scenarios")) opts.scenarios = scenarios;
  if (given("--sigma")) opts.sigma = sigma;
  if (given("--beta-ratio")) opts.beta_ratio = beta_ratio;

  try {
    if (given("--sigma-grid")) opts.sigma_grid = rld::cli::parse_sigma_grid(sigma_grid);
    if (given("--policies")) {
      std::stringstream list(policies);
      std::string item;
      while (std::getline(list, item, ',')) {
        if (!item.empty()) opts.policies.push_back(item);
      }
    }
    const std::string csv = rld::cli::run_command(chosen->get_name(), case_path, opts);
    if (out_path.empty()) {
      std::cout << csv;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw rld::Error(rld::ErrorCode::ValidationError, "cannot write " + out_path);
      out << csv;
    }
  } catch (const rld::Error& e) {
    std::cerr << "ERROR " << rld::to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ERROR Internal: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
