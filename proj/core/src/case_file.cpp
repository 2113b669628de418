#include "rld/case_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "rld/error.hpp"

namespace rld {

namespace {

struct Token {
  std::string_view text;
  int column;
};

struct Line {
  int number;
  std::vector<Token> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t' || raw[i] == '\r')) ++i;
      const std::size_t start = i;
      while (i < raw.size() && raw[i] != ' ' && raw[i] != '\t' && raw[i] != '\r') ++i;
      if (i > start) line.tokens.push_back({raw.substr(start, i - start), static_cast<int>(start) + 1});
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    pos = end + 1;
  }
  return lines;
}

class Parser {
 public:
  explicit Parser(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(int line, int column, const std::string& message) const {
    throw Error(ErrorCode::ParseError,
                std::string(source_) + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message);
  }

  double number(const Line& line, std::size_t index, bool allow_inf = false) const {
    const Token& tok = token(line, index);
    if (allow_inf && tok.text == "inf") return kUnbounded;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
    if (ec != std::errc() || ptr != tok.text.data() + tok.text.size() || !std::isfinite(value))
      fail(line.number, tok.column, "expected a number, found '" + std::string(tok.text) + "'");
    return value;
  }

  template <typename Int>
  Int integer(const Line& line, std::size_t index) const {
    const Token& tok = token(line, index);
    Int value = 0;
    const auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
    if (ec != std::errc() || ptr != tok.text.data() + tok.text.size())
      fail(line.number, tok.column, "expected an integer, found '" + std::string(tok.text) + "'");
    return value;
  }

  const Token& token(const Line& line, std::size_t index) const {
    if (index >= line.tokens.size()) {
      const Token& last = line.tokens.back();
      fail(line.number, last.column + static_cast<int>(last.text.size()), "missing field");
    }
    return line.tokens[index];
  }

  void arity(const Line& line, std::size_t expected) const {
    if (line.tokens.size() < expected) token(line, line.tokens.size());
    if (line.tokens.size() > expected)
      fail(line.number, line.tokens[expected].column, "unexpected extra field");
  }

 private:
  std::string_view source_;
};

struct BusRecord {
  double alpha, beta, d_hat;
};

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::ValidationError, message); }

std::string format_number(double v) {
  if (v == kUnbounded) return "inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<double> expand_grid(double first, double last, double step) {
  if (!(step > 0.0) || !(last >= first))
    throw Error(ErrorCode::DomainError, "sigma grid needs step > 0 and last >= first");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double v = first + k * step;
    if (v > last + 1e-9 * std::max(1.0, std::abs(last))) break;
    out.push_back(v);
  }
  return out;
}

std::vector<double> ExperimentDefaults::sigma_grid() const {
  return expand_grid(sigma_first, sigma_last, sigma_step);
}

CaseFile parse_case(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_case_text(buffer.str(), path);
}

CaseFile parse_case_text(std::string_view text, std::string_view source) {
  const Parser p(source);
  const std::vector<Line> lines = tokenize(text);
  if (lines.empty() || lines.front().tokens.front().text != "GRID")
    p.fail(lines.empty() ? 1 : lines.front().number, 1, "file must start with GRID");

  std::map<int, BusRecord> buses;
  std::vector<std::pair<int, int>> endpoints;
  std::vector<Branch> branches;
  std::optional<double> sigma;
  std::optional<Eigen::MatrixXd> cov;
  std::map<int, QuadraticCost> gencost;
  ExperimentDefaults defaults;

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const Line& line = lines[li];
    const std::string_view key = line.tokens.front().text;
    if (li == 0) {
      p.arity(line, 2);
      if (p.integer<int>(line, 1) != 1) p.fail(line.number, line.tokens[1].column, "unsupported format version");
    } else if (key == "GRID") {
      p.fail(line.number, 1, "duplicate GRID line");
    } else if (key == "BUS") {
      p.arity(line, 5);
      const int id = p.integer<int>(line, 1);
      if (buses.count(id)) p.fail(line.number, line.tokens[1].column, "duplicate bus id");
      buses[id] = {p.number(line, 2), p.number(line, 3), p.number(line, 4)};
    } else if (key == "BRANCH") {
      p.arity(line, 5);
      endpoints.emplace_back(p.integer<int>(line, 1), p.integer<int>(line, 2));
      branches.push_back({0, 0, p.number(line, 3), p.number(line, 4, true)});
    } else if (key == "SIGMA") {
      p.arity(line, 2);
      if (sigma) p.fail(line.number, 1, "duplicate SIGMA line");
      sigma = p.number(line, 1);
    } else if (key == "COV") {
      p.arity(line, 1);
      if (cov) p.fail(line.number, 1, "duplicate COV section");
      const int n = static_cast<int>(buses.size());
      if (n == 0) p.fail(line.number, 1, "COV must follow the BUS lines");
      Eigen::MatrixXd m(n, n);
      for (int r = 0; r < n; ++r) {
        if (li + 1 >= lines.size()) p.fail(line.number, 1, "COV section needs " + std::to_string(n) + " rows");
        const Line& row = lines[++li];
        p.arity(row, static_cast<std::size_t>(n));
        for (int c = 0; c < n; ++c) m(r, c) = p.number(row, static_cast<std::size_t>(c));
      }
      cov = m;
    } else if (key == "GENCOST") {
      p.arity(line, 4);
      const int id = p.integer<int>(line, 1);
      if (gencost.count(id)) p.fail(line.number, line.tokens[1].column, "duplicate GENCOST bus");
      gencost[id] = {p.number(line, 2), p.number(line, 3)};
    } else if (key == "SIGMA_GRID") {
      p.arity(line, 4);
      defaults.sigma_first = p.number(line, 1);
      defaults.sigma_last = p.number(line, 2);
      defaults.sigma_step = p.number(line, 3);
    } else if (key == "SEED") {
      p.arity(line, 2);
      defaults.seed = p.integer<std::uint64_t>(line, 1);
    } else if (key == "SCENARIOS") {
      p.arity(line, 2);
      defaults.scenarios = p.integer<int>(line, 1);
    } else {
      p.fail(line.number, 1, "unknown keyword '" + std::string(key) + "'");
    }
  }

  const int n = static_cast<int>(buses.size());
  if (n == 0) invalid("case has no buses");
  if (buses.begin()->first != 1 || buses.rbegin()->first != n) invalid("bus ids must be exactly 1..n");
  if (!sigma) invalid("SIGMA line is required");
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const auto [from, to] = endpoints[k];
    if (!buses.count(from) || !buses.count(to))
      invalid("branch " + std::to_string(k + 1) + " references an unknown bus");
    branches[k].from = from - 1;
    branches[k].to = to - 1;
  }
  for (const auto& [id, _] : gencost) {
    if (!buses.count(id)) invalid("GENCOST references unknown bus " + std::to_string(id));
  }
  if (n >= 2 && static_cast<int>(branches.size()) < n - 1) invalid("network needs at least n - 1 branches");
  if (defaults.scenarios < 1) invalid("SCENARIOS must be positive");

  CostModel costs;
  costs.alpha.resize(n);
  costs.beta.resize(n);
  Eigen::VectorXd d_hat(n);
  for (const auto& [id, rec] : buses) {
    costs.alpha(id - 1) = rec.alpha;
    costs.beta(id - 1) = rec.beta;
    d_hat(id - 1) = rec.d_hat;
  }
  if (!gencost.empty()) {
    costs.tie_break.resize(static_cast<std::size_t>(n));
    for (const auto& [id, q] : gencost) costs.tie_break[static_cast<std::size_t>(id - 1)] = q;
  }

  auto rethrow_as_validation = [](const Error& e) -> void {
    throw Error(ErrorCode::ValidationError, std::string(to_string(e.code())) + ": " + e.what());
  };
  std::optional<Network> net;
  try {
    net.emplace(n, branches);
    if (!net->connected()) invalid("network is not connected");
    costs.validate(n);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    rethrow_as_validation(e);
  }

  Forecast forecast;
  forecast.d_hat = d_hat;
  forecast.sigma_e = *sigma;
  forecast.corr = cov ? *cov : Eigen::MatrixXd::Identity(n, n);
  try {
    forecast.validate();
    defaults.sigma_grid();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    rethrow_as_validation(e);
  }
  return CaseFile{std::move(*net), std::move(costs), std::move(forecast), defaults};
}

std::string serialize_case(const CaseFile& c) {
  std::ostringstream out;
  const int n = c.network.bus_count();
  out << "GRID 1\n";
  for (int i = 0; i < n; ++i) {
    out << "BUS " << i + 1 << ' ' << format_number(c.costs.alpha(i)) << ' ' << format_number(c.costs.beta(i))
        << ' ' << format_number(c.forecast.d_hat(i)) << '\n';
  }
  for (const Branch& br : c.network.branches()) {
    out << "BRANCH " << br.from + 1 << ' ' << br.to + 1 << ' ' << format_number(br.susceptance) << ' '
        << format_number(br.capacity) << '\n';
  }
  out << "SIGMA " << format_number(c.forecast.sigma_e) << '\n';
  if (!c.forecast.corr.isIdentity(0.0)) {
    out << "COV\n";
    for (int r = 0; r < n; ++r) {
      for (int k = 0; k < n; ++k) out << (k ? " " : "") << format_number(c.forecast.corr(r, k));
      out << '\n';
    }
  }
  for (std::size_t i = 0; i < c.costs.tie_break.size(); ++i) {
    if (const auto& q = c.costs.tie_break[i]) {
      out << "GENCOST " << i + 1 << ' ' << format_number(q->c2) << ' ' << format_number(q->c1) << '\n';
    }
  }
  const ExperimentDefaults& d = c.defaults;
  out << "SIGMA_GRID " << format_number(d.sigma_first) << ' ' << format_number(d.sigma_last) << ' '
      << format_number(d.sigma_step) << '\n';
  out << "SEED " << d.seed << '\n';
  out << "SCENARIOS " << d.scenarios << '\n';
  return out.str();
}

}  // namespace rld
