#include <gtest/gtest.h>

#include "rld/case_file.hpp"
#include "rld/error.hpp"
#include "test_support.hpp"

namespace rld {
namespace {

using test::vec;

ErrorCode parse_code(std::string_view text, std::string* message = nullptr) {
  try {
    parse_case_text(text, "t.grid");
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "parsed: " << text;
  return ErrorCode::Unsupported;
}

void expect_same(const CaseFile& a, const CaseFile& b) {
  ASSERT_EQ(a.network.bus_count(), b.network.bus_count());
  ASSERT_EQ(a.network.branch_count(), b.network.branch_count());
  for (int k = 0; k < a.network.branch_count(); ++k) {
    EXPECT_EQ(a.network.branch(k).from, b.network.branch(k).from);
    EXPECT_EQ(a.network.branch(k).to, b.network.branch(k).to);
    EXPECT_EQ(a.network.branch(k).susceptance, b.network.branch(k).susceptance);
    EXPECT_EQ(a.network.branch(k).capacity, b.network.branch(k).capacity);
  }
  EXPECT_TRUE(a.costs.alpha == b.costs.alpha);
  EXPECT_TRUE(a.costs.beta == b.costs.beta);
  ASSERT_EQ(a.costs.tie_break.size(), b.costs.tie_break.size());
  for (std::size_t i = 0; i < a.costs.tie_break.size(); ++i) {
    ASSERT_EQ(a.costs.tie_break[i].has_value(), b.costs.tie_break[i].has_value());
    if (a.costs.tie_break[i]) {
      EXPECT_EQ(a.costs.tie_break[i]->c2, b.costs.tie_break[i]->c2);
      EXPECT_EQ(a.costs.tie_break[i]->c1, b.costs.tie_break[i]->c1);
    }
  }
  EXPECT_TRUE(a.forecast.d_hat == b.forecast.d_hat);
  EXPECT_EQ(a.forecast.sigma_e, b.forecast.sigma_e);
  EXPECT_TRUE(a.forecast.corr == b.forecast.corr);
  EXPECT_EQ(a.defaults.sigma_grid(), b.defaults.sigma_grid());
  EXPECT_EQ(a.defaults.seed, b.defaults.seed);
  EXPECT_EQ(a.defaults.scenarios, b.defaults.scenarios);
}

TEST(CaseFile, BundledNineBus) {
  const CaseFile c = test::load_case("case9.grid");
  EXPECT_EQ(c.network.bus_count(), 9);
  EXPECT_EQ(c.network.branch_count(), 9);
  EXPECT_EQ(c.forecast.d_hat(4), 90.0);
  EXPECT_EQ(c.forecast.d_hat(6), 100.0);
  EXPECT_EQ(c.forecast.d_hat(8), 125.0);
  EXPECT_EQ(c.forecast.d_hat.sum(), 315.0);
  EXPECT_TRUE(c.forecast.corr.isIdentity());
}

TEST(CaseFile, BundledCongestedNineBus) {
  const CaseFile c = test::load_case("case9_congested.grid");
  EXPECT_EQ(c.forecast.d_hat(4), 150.0);
  EXPECT_EQ(c.network.branch(2).from, 4);
  EXPECT_EQ(c.network.branch(2).to, 5);
  EXPECT_EQ(c.network.branch(2).capacity, 75.0);
}

TEST(CaseFile, SingleBusWithoutBranches) {
  const CaseFile c = parse_case_text("GRID 1\nBUS 1 1 2 10\nSIGMA 3\n");
  EXPECT_EQ(c.network.bus_count(), 1);
  EXPECT_EQ(c.network.branch_count(), 0);
  EXPECT_EQ(c.forecast.sigma_e, 3.0);
  EXPECT_EQ(c.defaults.sigma_grid(), (std::vector<double>{1, 6, 11, 16, 21, 26, 31, 36}));
  EXPECT_EQ(c.defaults.seed, 1u);
  EXPECT_EQ(c.defaults.scenarios, 100000);
}

TEST(CaseFile, CovarianceAndExtensions) {
  const CaseFile c = parse_case_text(
      "# two buses\nGRID 1\nBUS 1 0.5 1 0\nBUS 2 0.5 1 200 # load\nBRANCH 1 2 4 inf\nSIGMA 2\n"
      "COV\n1 0.25\n0.25 2\nGENCOST 2 0.1 3\nSIGMA_GRID 2 10 4\nSEED 77\nSCENARIOS 500\n");
  EXPECT_FALSE(c.network.branch(0).bounded());
  EXPECT_EQ(c.forecast.corr(0, 1), 0.25);
  EXPECT_EQ(c.forecast.corr(1, 1), 2.0);
  EXPECT_FALSE(c.costs.tie_break[0].has_value());
  EXPECT_EQ(c.costs.tie_break[1]->c1, 3.0);
  EXPECT_EQ(c.defaults.sigma_grid(), (std::vector<double>{2, 6, 10}));
  EXPECT_EQ(c.defaults.seed, 77u);
  EXPECT_EQ(c.defaults.scenarios, 500);
}

TEST(CaseFile, RoundTrip) {
  for (const char* name : {"case9.grid", "case9_congested.grid", "single_bus.grid", "two_bus.grid"}) {
    const CaseFile c = test::load_case(name);
    const std::string text = serialize_case(c);
    expect_same(parse_case_text(text), c);
    EXPECT_EQ(serialize_case(parse_case_text(text)), text) << name;
  }
  CaseFile c = parse_case_text("GRID 1\nBUS 1 0.1 0.3 1e-7\nBUS 2 0.2 0.3 -5\nBRANCH 2 1 0.123456789 17\nSIGMA 0.3\n"
                               "COV\n1 0.1\n0.1 1\n");
  expect_same(parse_case_text(serialize_case(c)), c);
}

TEST(CaseFile, SyntaxErrorsCarryPosition) {
  std::string msg;
  EXPECT_EQ(parse_code("GRID 1\nBUS 1 1 2 x\nSIGMA 1\n", &msg), ErrorCode::ParseError);
  EXPECT_NE(msg.find("t.grid:2:"), std::string::npos) << msg;
  EXPECT_EQ(parse_code("GRID 2\nBUS 1 1 2 3\nSIGMA 1\n"), ErrorCode::ParseError);
  EXPECT_EQ(parse_code("BUS 1 1 2 3\nSIGMA 1\n"), ErrorCode::ParseError);
  EXPECT_EQ(parse_code("GRID 1\nBUS 1 1 2\nSIGMA 1\n"), ErrorCode::ParseError);
  EXPECT_EQ(parse_code("GRID 1\nBUS 1 1 2 3\nSIGMA 1\nWIND 3\n", &msg), ErrorCode::ParseError);
  EXPECT_NE(msg.find("t.grid:4:1"), std::string::npos) << msg;
  EXPECT_EQ(parse_code("GRID 1\nBUS 1 1 2 3 4\nSIGMA 1\n"), ErrorCode::ParseError);
}

TEST(CaseFile, ValidationErrorsNameTheProblem) {
  EXPECT_EQ(parse_code("GRID 1\nBUS 1 1 2 3\n"), ErrorCode::ValidationError);
  EXPECT_EQ(parse_code("GRID 1\nBUS 2 1 2 3\nSIGMA 1\n"), ErrorCode::ValidationError);
  EXPECT_EQ(parse_code("GRID 1\nBUS 1 1 2 3\nBUS 2 1 2 3\nBRANCH 1 3 1 1\nSIGMA 1\n"), ErrorCode::ValidationError);
  EXPECT_EQ(parse_code("GRID 1\nBUS 1 1 2 3\nBUS 2 1 2 3\nSIGMA 1\n"), ErrorCode::ValidationError);
  EXPECT_EQ(parse_code("GRID 1\nBUS 1 3 2 3\nSIGMA 1\n"), ErrorCode::ValidationError);
  EXPECT_EQ(parse_code("GRID 1\nBUS 1 1 2 3\nBUS 2 1 2 3\nBRANCH 1 2 1 1\nSIGMA 1\nCOV\n1 0\n"),
            ErrorCode::ParseError);
  EXPECT_EQ(parse_code("GRID 1\nBUS 1 1 2 3\nBUS 2 1 2 3\nBRANCH 1 2 1 1\nSIGMA 1\nCOV\n1 3\n3 1\n"),
            ErrorCode::ValidationError);
}

TEST(CaseFile, MissingFile) {
  EXPECT_THROW(parse_case(test::data_path("does_not_exist.grid")), Error);
}

TEST(CaseFile, GridExpansion) {
  EXPECT_EQ(expand_grid(5, 40, 5), (std::vector<double>{5, 10, 15, 20, 25, 30, 35, 40}));
  EXPECT_EQ(expand_grid(0.1, 0.3, 0.1).size(), 3u);
  EXPECT_THROW(expand_grid(1, 2, 0), Error);
  EXPECT_THROW(expand_grid(3, 2, 1), Error);
}

}  // namespace
}  // namespace rld
