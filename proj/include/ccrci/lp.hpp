#pragma once

#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace ccrci::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  int var;
  double coef;
};
using SparseRow = std::vector<Term>;

enum class RowSense { LessEqual, GreaterEqual, Equal };

struct Row {
  SparseRow terms;
  RowSense sense;
  double rhs;
  int group;  // caller-defined tag, echoed back in infeasibility reports
};

/// min c'x  s.t.  rows, lower <= x <= upper.
class LinearProgram {
 public:
  int add_variable(double lower = -kInf, double upper = kInf, double cost = 0.0);
  /// Adds `count` variables with identical bounds; returns the first index.
  int add_variables(int count, double lower = -kInf, double upper = kInf, double cost = 0.0);
  void set_cost(int var, double cost);
  void set_bounds(int var, double lower, double upper);

  int add_row(SparseRow terms, RowSense sense, double rhs, int group = 0);
  int add_le(SparseRow terms, double rhs, int group = 0) {
    return add_row(std::move(terms), RowSense::LessEqual, rhs, group);
  }
  int add_ge(SparseRow terms, double rhs, int group = 0) {
    return add_row(std::move(terms), RowSense::GreaterEqual, rhs, group);
  }
  int add_eq(SparseRow terms, double rhs, int group = 0) {
    return add_row(std::move(terms), RowSense::Equal, rhs, group);
  }

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  std::size_t num_nonzeros() const;

  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<double>& cost() const { return cost_; }

  double row_activity(int row, const std::vector<double>& x) const;
  double objective(const std::vector<double>& x) const;

  /// Largest violation of any row or bound by `x` (0 when feasible).
  double max_violation(const std::vector<double>& x) const;

  /// Throws Error(ShapeMismatch) on out-of-range indices, NaN coefficients
  /// or crossed bounds.
  void validate() const;

  /// Structurally merges duplicate terms within each row.
  void compress();

 private:
  std::vector<double> lower_, upper_, cost_;
  std::vector<Row> rows_;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };
std::string_view to_string(Status status);

struct SolverOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  long iteration_limit = 0;  // 0 selects 50 * (rows + vars)
  int refactor_interval = 100;
  bool scale = true;
  bool perturb = true;
  int degenerate_stall = 200;  // consecutive degenerate pivots before Bland's rule
  bool verbose = false;
};

struct LPResult {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double objective_value = 0.0;
  long iterations = 0;
  // Populated for Optimal results: c - A'y equals reduced_costs.
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;
  // Populated for Infeasible results: rows whose activity stayed outside
  // their bounds at the Phase-1 optimum.
  std::vector<int> infeasible_rows;
};

/// Embedded bounded two-phase revised simplex. Throws
/// Error(NumericalBreakdown) when the basis cannot be factorized reliably.
LPResult solve(const LinearProgram& lp, const SolverOptions& opts = {});

/// Dense-tableau simplex with Bland's rule. Exact on small problems and
/// independent of the embedded solver; used for cross-checks.
LPResult solve_dense_tableau(const LinearProgram& lp, const SolverOptions& opts = {});

/// Lagrangian dual bound c'x >= b'y + sum_j bound_j d_j evaluated at the
/// reported duals (meaningful for Optimal results).
double dual_objective(const LinearProgram& lp, const LPResult& result);

using SolverFn = std::function<LPResult(const LinearProgram&, const SolverOptions&)>;

/// Registry of solver plugins. "embedded" and "dense-tableau" are always
/// present.
void register_solver(const std::string& id, SolverFn fn);
bool has_solver(std::string_view id);
std::vector<std::string> solver_ids();
/// Throws Error(PluginUnavailable) for an unknown id.
LPResult solve_external(const LinearProgram& lp, std::string_view solver_id,
                        const SolverOptions& opts = {});

/// Solver id from CCRCI_LP_SOLVER, or "embedded".
std::string default_solver_id();

/// Fixed-format MPS text of the problem.
std::string to_mps(const LinearProgram& lp, std::string_view name = "CCRCI");

}  // namespace ccrci::lp
