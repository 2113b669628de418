#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rld/dcopf.hpp"
#include "rld/forecast.hpp"
#include "rld/network.hpp"

namespace rld {

struct ExperimentDefaults {
  double sigma_first = 1.0;
  double sigma_last = 40.0;
  double sigma_step = 5.0;
  std::uint64_t seed = 1;
  int scenarios = 100000;

  std::vector<double> sigma_grid() const;
};

struct CaseFile {
  Network network;
  CostModel costs;
  Forecast forecast;
  ExperimentDefaults defaults;
};

/// Expands first, first + step, ... up to last (inclusive).
std::vector<double> expand_grid(double first, double last, double step);

CaseFile parse_case(const std::string& path);
CaseFile parse_case_text(std::string_view text, std::string_view source = "<input>");
std::string serialize_case(const CaseFile& c);

}  // namespace rld
