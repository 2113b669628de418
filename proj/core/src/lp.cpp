#include "rld/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rld/error.hpp"

namespace rld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kReducedCostTol = 1e-9;
constexpr int kRefactorInterval = 64;

enum class VarKind { Shift, Reflect, Split };

struct VarMap {
  VarKind kind;
  int column;
  int negative_column;  // Split only
  double offset;        // lower bound (Shift) or upper bound (Reflect)
};

// Equality-form program: A x = b, x >= 0, b >= 0, columns stored contiguously.
struct StandardForm {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;  // column major
  std::vector<double> b;
  std::vector<double> c;
  std::vector<double> row_sign;
  std::vector<VarMap> vars;
  int eq_rows = 0;
  int ineq_rows = 0;
  std::vector<int> bound_row;  // per original variable, -1 when no upper-bound row

  double& at(int i, int j) { return a[static_cast<std::size_t>(j) * rows + i]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(j) * rows + i]; }
};

StandardForm to_standard_form(const LinearProgram& lp) {
  StandardForm sf;
  const int n = lp.variables();
  const int me = static_cast<int>(lp.eq_rhs.size());
  const int mi = static_cast<int>(lp.ineq_rhs.size());
  sf.eq_rows = me;
  sf.ineq_rows = mi;
  sf.bound_row.assign(static_cast<std::size_t>(n), -1);

  int structural = 0;
  int bound_rows = 0;
  sf.vars.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower(j);
    const double up = lp.upper(j);
    VarMap& v = sf.vars[static_cast<std::size_t>(j)];
    if (std::isfinite(lo)) {
      v = {VarKind::Shift, structural++, -1, lo};
      if (std::isfinite(up)) sf.bound_row[static_cast<std::size_t>(j)] = me + mi + bound_rows++;
    } else if (std::isfinite(up)) {
      v = {VarKind::Reflect, structural++, -1, up};
    } else {
      v = {VarKind::Split, structural, structural + 1, 0.0};
      structural += 2;
    }
  }

  sf.rows = me + mi + bound_rows;
  sf.cols = structural + mi + bound_rows;
  sf.a.assign(static_cast<std::size_t>(sf.rows) * sf.cols, 0.0);
  sf.b.assign(static_cast<std::size_t>(sf.rows), 0.0);
  sf.c.assign(static_cast<std::size_t>(sf.cols), 0.0);
  sf.row_sign.assign(static_cast<std::size_t>(sf.rows), 1.0);

  for (int i = 0; i < me; ++i) sf.b[static_cast<std::size_t>(i)] = lp.eq_rhs(i);
  for (int i = 0; i < mi; ++i) sf.b[static_cast<std::size_t>(me + i)] = lp.ineq_rhs(i);

  for (int j = 0; j < n; ++j) {
    const VarMap& v = sf.vars[static_cast<std::size_t>(j)];
    const double sign = v.kind == VarKind::Reflect ? -1.0 : 1.0;
    sf.c[static_cast<std::size_t>(v.column)] = sign * lp.objective(j);
    if (v.kind == VarKind::Split) sf.c[static_cast<std::size_t>(v.negative_column)] = -lp.objective(j);
    auto fill = [&](int row, double coef) {
      if (coef == 0.0) return;
      sf.at(row, v.column) = sign * coef;
      if (v.kind == VarKind::Split) sf.at(row, v.negative_column) = -coef;
      sf.b[static_cast<std::size_t>(row)] -= coef * v.offset;
    };
    for (int i = 0; i < me; ++i) fill(i, lp.eq_matrix(i, j));
    for (int i = 0; i < mi; ++i) fill(me + i, lp.ineq_matrix(i, j));
    const int br = sf.bound_row[static_cast<std::size_t>(j)];
    if (br >= 0) {
      sf.at(br, v.column) = 1.0;
      sf.b[static_cast<std::size_t>(br)] = lp.upper(j) - lp.lower(j);
    }
  }
  for (int i = 0; i < mi + bound_rows; ++i) sf.at(me + i, structural + i) = 1.0;

  for (int i = 0; i < sf.rows; ++i) {
    if (sf.b[static_cast<std::size_t>(i)] < 0.0) {
      sf.row_sign[static_cast<std::size_t>(i)] = -1.0;
      sf.b[static_cast<std::size_t>(i)] = -sf.b[static_cast<std::size_t>(i)];
      for (int j = 0; j < sf.cols; ++j) sf.at(i, j) = -sf.at(i, j);
    }
  }
  return sf;
}

class Simplex {
 public:
  explicit Simplex(StandardForm& sf) : sf_(sf), m_(sf.rows) {}

  // Returns false when the program is infeasible.
  bool phase_one() {
    crash_basis();
    if (artificials_ == 0) return true;
    std::vector<double> cost(static_cast<std::size_t>(total_cols()), 0.0);
    for (int j = sf_.cols; j < total_cols(); ++j) cost[static_cast<std::size_t>(j)] = 1.0;
    if (!iterate(cost)) throw Error(ErrorCode::NumericalFailure, "phase one reported unbounded");

    double infeasibility = 0.0;
    double scale = 1.0;
    for (double v : sf_.b) scale = std::max(scale, std::abs(v));
    for (int i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] >= sf_.cols) infeasibility += std::max(0.0, xb_[static_cast<std::size_t>(i)]);
    }
    if (infeasibility > lp_tolerance::feasibility * scale) return false;
    drive_out_artificials();
    return true;
  }

  // Returns false when the program is unbounded.
  bool phase_two() {
    std::vector<double> cost(static_cast<std::size_t>(total_cols()), 0.0);
    std::copy(sf_.c.begin(), sf_.c.end(), cost.begin());
    return iterate(cost);
  }

  std::vector<double> primal() const {
    std::vector<double> x(static_cast<std::size_t>(sf_.cols), 0.0);
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[static_cast<std::size_t>(i)];
      if (j < sf_.cols) x[static_cast<std::size_t>(j)] = std::max(0.0, xb_[static_cast<std::size_t>(i)]);
    }
    return x;
  }

  std::vector<double> row_duals() const { return duals(sf_.c); }

  int iterations() const { return iterations_; }

 private:
  int total_cols() const { return sf_.cols + artificials_; }

  double column(int j, int i) const {
    if (j < sf_.cols) return sf_.at(i, j);
    return artificial_row_[static_cast<std::size_t>(j - sf_.cols)] == i ? 1.0 : 0.0;
  }

  void crash_basis() {
    basis_.assign(static_cast<std::size_t>(m_), -1);
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    xb_.assign(static_cast<std::size_t>(m_), 0.0);
    // Prefer slack-like columns: a single positive entry.
    for (int j = sf_.cols - 1; j >= 0; --j) {
      int row = -1;
      int nonzeros = 0;
      for (int i = 0; i < m_ && nonzeros < 2; ++i) {
        if (sf_.at(i, j) != 0.0) {
          ++nonzeros;
          row = i;
        }
      }
      if (nonzeros != 1 || sf_.at(row, j) <= 0.0) continue;
      if (basis_[static_cast<std::size_t>(row)] != -1) continue;
      basis_[static_cast<std::size_t>(row)] = j;
    }
    artificials_ = 0;
    artificial_row_.clear();
    for (int i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] == -1) {
        basis_[static_cast<std::size_t>(i)] = sf_.cols + artificials_++;
        artificial_row_.push_back(i);
      }
    }
    for (int i = 0; i < m_; ++i) {
      const double piv = column(basis_[static_cast<std::size_t>(i)], i);
      binv_[static_cast<std::size_t>(i) * m_ + i] = 1.0 / piv;
      xb_[static_cast<std::size_t>(i)] = sf_.b[static_cast<std::size_t>(i)] / piv;
    }
    position_.assign(static_cast<std::size_t>(total_cols()), -1);
    for (int i = 0; i < m_; ++i) position_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = i;
  }

  std::vector<double> duals(const std::vector<double>& cost) const {
    std::vector<double> y(static_cast<std::size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[static_cast<std::size_t>(i)];
      const double cb = j < static_cast<int>(cost.size()) ? cost[static_cast<std::size_t>(j)] : 0.0;
      if (cb == 0.0) continue;
      const double* row = &binv_[static_cast<std::size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) y[static_cast<std::size_t>(k)] += cb * row[k];
    }
    return y;
  }

  void basis_column(int j, std::vector<double>& w) const {
    w.assign(static_cast<std::size_t>(m_), 0.0);
    if (j >= sf_.cols) {
      const int r = artificial_row_[static_cast<std::size_t>(j - sf_.cols)];
      for (int i = 0; i < m_; ++i) w[static_cast<std::size_t>(i)] = binv_[static_cast<std::size_t>(i) * m_ + r];
      return;
    }
    const double* col = &sf_.a[static_cast<std::size_t>(j) * m_];
    for (int k = 0; k < m_; ++k) {
      const double v = col[k];
      if (v == 0.0) continue;
      for (int i = 0; i < m_; ++i) w[static_cast<std::size_t>(i)] += binv_[static_cast<std::size_t>(i) * m_ + k] * v;
    }
  }

  void pivot(int r, int q, const std::vector<double>& w) {
    const double piv = w[static_cast<std::size_t>(r)];
    double* prow = &binv_[static_cast<std::size_t>(r) * m_];
    for (int k = 0; k < m_; ++k) prow[k] /= piv;
    const double step = xb_[static_cast<std::size_t>(r)] / piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = w[static_cast<std::size_t>(i)];
      if (f == 0.0) continue;
      double* row = &binv_[static_cast<std::size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
      xb_[static_cast<std::size_t>(i)] -= f * step;
    }
    xb_[static_cast<std::size_t>(r)] = step;
    position_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = -1;
    basis_[static_cast<std::size_t>(r)] = q;
    position_[static_cast<std::size_t>(q)] = r;
    ++iterations_;
    if (++since_refactor_ >= kRefactorInterval) refactor();
  }

  void refactor() {
    since_refactor_ = 0;
    Eigen::MatrixXd basis_matrix(m_, m_);
    for (int i = 0; i < m_; ++i) {
      for (int k = 0; k < m_; ++k) basis_matrix(k, i) = column(basis_[static_cast<std::size_t>(i)], k);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis_matrix);
    if (!lu.isInvertible()) throw Error(ErrorCode::NumericalFailure, "basis matrix became singular");
    const Eigen::MatrixXd inv = lu.inverse();
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(sf_.b.data(), m_);
    const Eigen::VectorXd x = inv * rhs;
    for (int i = 0; i < m_; ++i) {
      for (int k = 0; k < m_; ++k) binv_[static_cast<std::size_t>(i) * m_ + k] = inv(i, k);
      xb_[static_cast<std::size_t>(i)] = x(i);
    }
  }

  // Bland's rule: lowest-index improving column, lowest-index leaving variable on ties.
  bool iterate(const std::vector<double>& cost) {
    std::vector<double> w;
    const int limit = 50 * (m_ + total_cols()) + 1000;
    for (int guard = 0; guard < limit; ++guard) {
      const std::vector<double> y = duals(cost);
      int entering = -1;
      for (int j = 0; j < sf_.cols; ++j) {
        if (position_[static_cast<std::size_t>(j)] >= 0) continue;
        const double* col = &sf_.a[static_cast<std::size_t>(j) * m_];
        double d = cost[static_cast<std::size_t>(j)];
        for (int k = 0; k < m_; ++k) d -= y[static_cast<std::size_t>(k)] * col[k];
        if (d < -kReducedCostTol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;

      basis_column(entering, w);
      int leaving = -1;
      double best = kInf;
      for (int i = 0; i < m_; ++i) {
        const double wi = w[static_cast<std::size_t>(i)];
        if (wi <= lp_tolerance::pivot) continue;
        const double ratio = std::max(0.0, xb_[static_cast<std::size_t>(i)]) / wi;
        const double tie = 1e-12 * std::max(1.0, best);
        if (leaving < 0 || ratio < best - tie ||
            (ratio <= best + tie && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leaving)])) {
          if (leaving < 0 || ratio < best - tie) best = ratio;
          leaving = i;
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering, w);
    }
    throw Error(ErrorCode::NumericalFailure, "simplex iteration limit reached");
  }

  void drive_out_artificials() {
    std::vector<double> w;
    for (int r = 0; r < m_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < sf_.cols) continue;
      const double* brow = &binv_[static_cast<std::size_t>(r) * m_];
      for (int j = 0; j < sf_.cols; ++j) {
        if (position_[static_cast<std::size_t>(j)] >= 0) continue;
        const double* col = &sf_.a[static_cast<std::size_t>(j) * m_];
        double alpha = 0.0;
        for (int k = 0; k < m_; ++k) alpha += brow[k] * col[k];
        if (std::abs(alpha) > 1e-9) {
          basis_column(j, w);
          pivot(r, j, w);
          break;
        }
      }
      // A row with no eligible column is redundant; its artificial stays at zero.
    }
  }

  StandardForm& sf_;
  int m_;
  int artificials_ = 0;
  std::vector<int> artificial_row_;
  std::vector<int> basis_;
  std::vector<int> position_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  int iterations_ = 0;
  int since_refactor_ = 0;
};

}  // namespace

LinearProgram::LinearProgram(int variables)
    : objective(Eigen::VectorXd::Zero(variables)),
      eq_matrix(0, variables),
      eq_rhs(0),
      ineq_matrix(0, variables),
      ineq_rhs(0),
      lower(Eigen::VectorXd::Zero(variables)),
      upper(Eigen::VectorXd::Constant(variables, kInf)) {}

void LinearProgram::validate() const {
  const int n = variables();
  if (eq_matrix.cols() != n || ineq_matrix.cols() != n || lower.size() != n || upper.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "linear program column counts disagree");
  if (eq_matrix.rows() != eq_rhs.size() || ineq_matrix.rows() != ineq_rhs.size())
    throw Error(ErrorCode::DimensionMismatch, "linear program row counts disagree");
  if (!eq_rhs.allFinite() || !ineq_rhs.allFinite() || !objective.allFinite() ||
      !eq_matrix.allFinite() || !ineq_matrix.allFinite())
    throw Error(ErrorCode::DomainError, "linear program data must be finite");
  for (int j = 0; j < n; ++j) {
    if (std::isnan(lower(j)) || std::isnan(upper(j)) || lower(j) == kInf || upper(j) == -kInf)
      throw Error(ErrorCode::DomainError, "invalid variable bound");
    if (lower(j) > upper(j))
      throw Error(ErrorCode::DomainError, "variable lower bound exceeds upper bound");
  }
}

LpSolution solve_lp(const LinearProgram& lp) {
  lp.validate();
  const int n = lp.variables();
  const int me = static_cast<int>(lp.eq_rhs.size());
  const int mi = static_cast<int>(lp.ineq_rhs.size());

  LpSolution sol;
  sol.primal = Eigen::VectorXd::Zero(n);
  sol.dual_eq = Eigen::VectorXd::Zero(me);
  sol.dual_ineq = Eigen::VectorXd::Zero(mi);
  sol.dual_lower = Eigen::VectorXd::Zero(n);
  sol.dual_upper = Eigen::VectorXd::Zero(n);

  for (int j = 0; j < n; ++j) {
    if (lp.lower(j) > lp.upper(j)) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
  }

  StandardForm sf = to_standard_form(lp);
  Simplex simplex(sf);
  if (!simplex.phase_one()) {
    sol.status = LpStatus::Infeasible;
    sol.iterations = simplex.iterations();
    return sol;
  }
  if (!simplex.phase_two()) {
    sol.status = LpStatus::Unbounded;
    sol.iterations = simplex.iterations();
    return sol;
  }
  sol.status = LpStatus::Optimal;
  sol.iterations = simplex.iterations();

  const std::vector<double> x = simplex.primal();
  const std::vector<double> y = simplex.row_duals();
  auto reduced_cost = [&](int col) {
    double d = sf.c[static_cast<std::size_t>(col)];
    for (int i = 0; i < sf.rows; ++i) d -= y[static_cast<std::size_t>(i)] * sf.at(i, col);
    return d;
  };

  for (int j = 0; j < n; ++j) {
    const VarMap& v = sf.vars[static_cast<std::size_t>(j)];
    switch (v.kind) {
      case VarKind::Shift:
        sol.primal(j) = v.offset + x[static_cast<std::size_t>(v.column)];
        sol.dual_lower(j) = reduced_cost(v.column);
        break;
      case VarKind::Reflect:
        sol.primal(j) = v.offset - x[static_cast<std::size_t>(v.column)];
        sol.dual_upper(j) = reduced_cost(v.column);
        break;
      case VarKind::Split:
        sol.primal(j) = x[static_cast<std::size_t>(v.column)] - x[static_cast<std::size_t>(v.negative_column)];
        break;
    }
    const int br = sf.bound_row[static_cast<std::size_t>(j)];
    if (br >= 0) sol.dual_upper(j) = -sf.row_sign[static_cast<std::size_t>(br)] * y[static_cast<std::size_t>(br)];
  }
  for (int i = 0; i < me; ++i) sol.dual_eq(i) = sf.row_sign[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
  for (int i = 0; i < mi; ++i)
    sol.dual_ineq(i) = -sf.row_sign[static_cast<std::size_t>(me + i)] * y[static_cast<std::size_t>(me + i)];
  sol.objective_value = lp.objective.dot(sol.primal);
  return sol;
}

double dual_objective(const LinearProgram& lp, const LpSolution& sol) {
  double value = lp.eq_rhs.dot(sol.dual_eq) - lp.ineq_rhs.dot(sol.dual_ineq);
  for (int j = 0; j < lp.variables(); ++j) {
    if (std::isfinite(lp.lower(j))) value += lp.lower(j) * sol.dual_lower(j);
    if (std::isfinite(lp.upper(j))) value -= lp.upper(j) * sol.dual_upper(j);
  }
  return value;
}

}  // namespace rld
