#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rld/case_file.hpp"

namespace rld::cli {

struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> scenarios;
  std::optional<double> sigma;
  std::optional<std::vector<double>> sigma_grid;
  std::optional<double> beta_ratio;
  std::vector<std::string> policies;  ///< empty selects the default set
  int threads = 1;
  std::string case_label = "case";
};

/// "a:b:step" -> a, a + step, ..., b
std::vector<double> parse_sigma_grid(std::string_view spec);

/// Sets every real-time price to ratio * mean day-ahead price of the buses
/// that can buy day ahead (alpha < beta). Buses without a day-ahead option
/// (alpha == beta) keep alpha equal to the new beta.
void apply_beta_ratio(CaseFile& c, double ratio);

/// Six significant digits, no negative zero.
std::string format_value(double v);

std::string cmd_nda(const CaseFile& c, const CommandOptions& o);
std::string cmd_rld(const CaseFile& c, const CommandOptions& o);
std::string cmd_evaluate(const CaseFile& c, const CommandOptions& o);
std::string cmd_price(const CaseFile& c, const CommandOptions& o);

/// Dispatches on "nda", "rld", "evaluate" or "price".
std::string run_command(std::string_view command, const std::string& case_path, CommandOptions o);

}  // namespace rld::cli
