// Textbook dense-tableau simplex (Bland's rule, artificial-variable Phase 1).
// Slow but simple; it shares no code with the embedded solver so the two can
// check each other.

#include <cmath>
#include <vector>

#include "ccrci/lp.hpp"

namespace ccrci::lp {
namespace {

constexpr double kEps = 1e-9;

struct Substitution {
  // original x_j = offset + sign * y[pos] (- y[neg] when free)
  double offset = 0.0;
  double sign = 1.0;
  int pos = -1;
  int neg = -1;
};

class Tableau {
 public:
  Tableau(int rows, int cols) : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0) {}
  double& at(int r, int c) { return data_[r * (cols_ + 1) + c]; }
  double at(int r, int c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(int r) { return at(r, cols_); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  void pivot(int pr, int pc) {
    const double p = at(pr, pc);
    for (int c = 0; c <= cols_; ++c) at(pr, c) /= p;
    for (int r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
    }
  }

 private:
  int rows_, cols_;
  std::vector<double> data_;
};

// Runs Bland's rule on the objective row (row index rows()). Columns with
// allowed[c] == false never enter. Returns false when unbounded.
bool run_bland(Tableau& t, std::vector<int>& basis, const std::vector<bool>& allowed, long& iterations,
               long limit, bool& hit_limit) {
  const int obj = t.rows();
  while (true) {
    if (iterations >= limit) {
      hit_limit = true;
      return true;
    }
    int enter = -1;
    for (int c = 0; c < t.cols(); ++c) {
      if (allowed[c] && t.at(obj, c) < -kEps) {
        enter = c;
        break;
      }
    }
    if (enter < 0) return true;
    int leave = -1;
    double best = 0.0;
    for (int r = 0; r < t.rows(); ++r) {
      if (t.at(r, enter) > kEps) {
        const double ratio = t.rhs(r) / t.at(r, enter);
        if (leave < 0 || ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
    }
    if (leave < 0) return false;
    t.pivot(leave, enter);
    basis[leave] = enter;
    ++iterations;
  }
}

}  // namespace

LPResult solve_dense_tableau(const LinearProgram& lp, const SolverOptions& opts) {
  lp.validate();
  const int n = lp.num_variables();
  LPResult result;

  // Variable substitution to nonnegative y.
  std::vector<Substitution> sub(n);
  int ny = 0;
  struct BoundRow {
    int col;
    double width;
  };
  std::vector<BoundRow> bound_rows;
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower()[j], hi = lp.upper()[j];
    if (std::isfinite(lo)) {
      sub[j] = {lo, 1.0, ny++, -1};
      if (std::isfinite(hi)) bound_rows.push_back({sub[j].pos, hi - lo});
    } else if (std::isfinite(hi)) {
      sub[j] = {hi, -1.0, ny++, -1};
    } else {
      sub[j] = {0.0, 1.0, ny, ny + 1};
      ny += 2;
    }
  }

  struct DenseRow {
    std::vector<double> a;
    RowSense sense;
    double rhs;
  };
  std::vector<DenseRow> rows;
  for (const auto& row : lp.rows()) {
    DenseRow d{std::vector<double>(ny, 0.0), row.sense, row.rhs};
    for (const auto& term : row.terms) {
      const auto& s = sub[term.var];
      d.rhs -= term.coef * s.offset;
      d.a[s.pos] += term.coef * s.sign;
      if (s.neg >= 0) d.a[s.neg] -= term.coef;
    }
    rows.push_back(std::move(d));
  }
  for (const auto& b : bound_rows) {
    DenseRow d{std::vector<double>(ny, 0.0), RowSense::LessEqual, b.width};
    d.a[b.col] = 1.0;
    rows.push_back(std::move(d));
  }

  const int m = static_cast<int>(rows.size());
  int n_slack = 0;
  for (const auto& r : rows) n_slack += r.sense != RowSense::Equal ? 1 : 0;
  const int art0 = ny + n_slack;
  const int cols = art0 + m;
  Tableau t(m, cols);
  std::vector<double> row_sign(m, 1.0);
  int slack = ny;
  for (int i = 0; i < m; ++i) {
    for (int c = 0; c < ny; ++c) t.at(i, c) = rows[i].a[c];
    if (rows[i].sense == RowSense::LessEqual) t.at(i, slack++) = 1.0;
    else if (rows[i].sense == RowSense::GreaterEqual) t.at(i, slack++) = -1.0;
    t.rhs(i) = rows[i].rhs;
    if (t.rhs(i) < 0.0) {
      row_sign[i] = -1.0;
      for (int c = 0; c <= cols; ++c) t.at(i, c) = -t.at(i, c);
    }
    t.at(i, art0 + i) = 1.0;
  }
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = art0 + i;

  const long limit = opts.iteration_limit > 0 ? opts.iteration_limit : 50L * (m + cols) + 1000;
  bool hit_limit = false;

  // Phase 1: minimize the sum of artificials.
  for (int c = 0; c <= cols; ++c) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += t.at(i, c);
    t.at(m, c) = (c >= art0 && c < cols) ? 0.0 : -s;
  }
  std::vector<bool> allowed(cols, true);
  run_bland(t, basis, allowed, result.iterations, limit, hit_limit);
  if (hit_limit) {
    result.status = Status::IterationLimit;
    return result;
  }
  if (-t.rhs(m) > std::max(opts.feas_tol, 1e-9) * 10.0) {
    result.status = Status::Infeasible;
    for (int i = 0; i < m && i < lp.num_rows(); ++i) {
      if (basis[i] >= art0 && t.rhs(i) > opts.feas_tol) result.infeasible_rows.push_back(i);
    }
    return result;
  }
  // Drive remaining artificials out where possible.
  for (int i = 0; i < m; ++i) {
    if (basis[i] < art0) continue;
    for (int c = 0; c < art0; ++c) {
      if (std::abs(t.at(i, c)) > kEps) {
        t.pivot(i, c);
        basis[i] = c;
        break;
      }
    }
  }
  for (int c = art0; c < cols; ++c) allowed[c] = false;

  // Phase 2 objective row in y-space.
  std::vector<double> cy(cols, 0.0);
  for (int j = 0; j < n; ++j) {
    const double c = lp.cost()[j];
    cy[sub[j].pos] += c * sub[j].sign;
    if (sub[j].neg >= 0) cy[sub[j].neg] -= c;
  }
  for (int c = 0; c <= cols; ++c) t.at(m, c) = c < cols ? cy[c] : 0.0;
  for (int i = 0; i < m; ++i) {
    const double cb = cy[basis[i]];
    if (cb == 0.0) continue;
    for (int c = 0; c <= cols; ++c) t.at(m, c) -= cb * t.at(i, c);
  }
  const bool bounded = run_bland(t, basis, allowed, result.iterations, limit, hit_limit);
  if (hit_limit) {
    result.status = Status::IterationLimit;
    return result;
  }
  if (!bounded) {
    result.status = Status::Unbounded;
    return result;
  }

  std::vector<double> yv(cols, 0.0);
  for (int i = 0; i < m; ++i) yv[basis[i]] = t.rhs(i);
  result.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    result.x[j] = sub[j].offset + sub[j].sign * yv[sub[j].pos] - (sub[j].neg >= 0 ? yv[sub[j].neg] : 0.0);
  }
  result.status = Status::Optimal;
  result.objective_value = lp.objective(result.x);

  // Row duals from the artificial columns: reduced cost of artificial i is -y_i.
  result.row_duals.assign(lp.num_rows(), 0.0);
  for (int i = 0; i < lp.num_rows(); ++i) result.row_duals[i] = -t.at(m, art0 + i) * row_sign[i];
  result.reduced_costs.assign(n, 0.0);
  for (int j = 0; j < n; ++j) result.reduced_costs[j] = lp.cost()[j];
  for (int i = 0; i < lp.num_rows(); ++i) {
    for (const auto& term : lp.rows()[i].terms) result.reduced_costs[term.var] -= term.coef * result.row_duals[i];
  }
  return result;
}

}  // namespace ccrci::lp
