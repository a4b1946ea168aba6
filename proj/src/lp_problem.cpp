#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>

#include "ccrci/error.hpp"
#include "ccrci/lp.hpp"

namespace ccrci::lp {

int LinearProgram::add_variable(double lower, double upper, double cost) {
  lower_.push_back(lower);
  upper_.push_back(upper);
  cost_.push_back(cost);
  return static_cast<int>(cost_.size()) - 1;
}

int LinearProgram::add_variables(int count, double lower, double upper, double cost) {
  const int first = num_variables();
  lower_.insert(lower_.end(), count, lower);
  upper_.insert(upper_.end(), count, upper);
  cost_.insert(cost_.end(), count, cost);
  return first;
}

void LinearProgram::set_cost(int var, double cost) { cost_.at(var) = cost; }

void LinearProgram::set_bounds(int var, double lower, double upper) {
  lower_.at(var) = lower;
  upper_.at(var) = upper;
}

int LinearProgram::add_row(SparseRow terms, RowSense sense, double rhs, int group) {
  rows_.push_back(Row{std::move(terms), sense, rhs, group});
  return static_cast<int>(rows_.size()) - 1;
}

std::size_t LinearProgram::num_nonzeros() const {
  std::size_t nnz = 0;
  for (const auto& r : rows_) nnz += r.terms.size();
  return nnz;
}

double LinearProgram::row_activity(int row, const std::vector<double>& x) const {
  double a = 0.0;
  for (const auto& t : rows_.at(row).terms) a += t.coef * x.at(t.var);
  return a;
}

double LinearProgram::objective(const std::vector<double>& x) const {
  double v = 0.0;
  for (std::size_t j = 0; j < cost_.size(); ++j) v += cost_[j] * x.at(j);
  return v;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < cost_.size(); ++j) {
    worst = std::max({worst, lower_[j] - x[j], x[j] - upper_[j]});
  }
  for (int r = 0; r < num_rows(); ++r) {
    const double a = row_activity(r, x);
    const double rhs = rows_[r].rhs;
    switch (rows_[r].sense) {
      case RowSense::LessEqual: worst = std::max(worst, a - rhs); break;
      case RowSense::GreaterEqual: worst = std::max(worst, rhs - a); break;
      case RowSense::Equal: worst = std::max(worst, std::abs(a - rhs)); break;
    }
  }
  return worst;
}

void LinearProgram::validate() const {
  const int n = num_variables();
  for (int j = 0; j < n; ++j) {
    if (std::isnan(lower_[j]) || std::isnan(upper_[j]) || std::isnan(cost_[j]) ||
        std::isinf(cost_[j])) {
      throw Error(ErrorCode::ShapeMismatch, "variable " + std::to_string(j) + " has NaN data");
    }
    if (lower_[j] > upper_[j]) {
      throw Error(ErrorCode::ShapeMismatch, "variable " + std::to_string(j) + " has crossed bounds");
    }
  }
  for (int r = 0; r < num_rows(); ++r) {
    if (!std::isfinite(rows_[r].rhs)) {
      throw Error(ErrorCode::ShapeMismatch, "row " + std::to_string(r) + " has non-finite rhs");
    }
    for (const auto& t : rows_[r].terms) {
      if (t.var < 0 || t.var >= n) {
        throw Error(ErrorCode::ShapeMismatch, "row " + std::to_string(r) + " references variable " +
                                                  std::to_string(t.var) + " out of range");
      }
      if (!std::isfinite(t.coef)) {
        throw Error(ErrorCode::ShapeMismatch, "row " + std::to_string(r) + " has a non-finite coefficient");
      }
    }
  }
}

void LinearProgram::compress() {
  for (auto& row : rows_) {
    std::sort(row.terms.begin(), row.terms.end(),
              [](const Term& a, const Term& b) { return a.var < b.var; });
    SparseRow merged;
    merged.reserve(row.terms.size());
    for (const auto& t : row.terms) {
      if (!merged.empty() && merged.back().var == t.var) {
        merged.back().coef += t.coef;
      } else {
        merged.push_back(t);
      }
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
    row.terms = std::move(merged);
  }
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::IterationLimit: return "IterationLimit";
  }
  return "Unknown";
}

double dual_objective(const LinearProgram& lp, const LPResult& result) {
  constexpr double kZero = 1e-12;
  double value = 0.0;
  const auto term = [&](double mult, double lo, double hi) {
    if (mult > kZero) {
      value += std::isfinite(lo) ? mult * lo : -kInf;
    } else if (mult < -kZero) {
      value += std::isfinite(hi) ? mult * hi : -kInf;
    }
  };
  for (int r = 0; r < lp.num_rows(); ++r) {
    const auto& row = lp.rows()[r];
    const double lo = row.sense == RowSense::LessEqual ? -kInf : row.rhs;
    const double hi = row.sense == RowSense::GreaterEqual ? kInf : row.rhs;
    term(result.row_duals.at(r), lo, hi);
  }
  for (int j = 0; j < lp.num_variables(); ++j) {
    term(result.reduced_costs.at(j), lp.lower()[j], lp.upper()[j]);
  }
  return value;
}

namespace {

struct Registry {
  std::mutex mutex;
  std::map<std::string, SolverFn, std::less<>> solvers;

  Registry() {
    solvers.emplace("embedded", [](const LinearProgram& lp, const SolverOptions& o) { return solve(lp, o); });
    solvers.emplace("dense-tableau", [](const LinearProgram& lp, const SolverOptions& o) {
      return solve_dense_tableau(lp, o);
    });
  }
};

Registry& registry() {
  static Registry instance;
  return instance;
}

}  // namespace

void register_solver(const std::string& id, SolverFn fn) {
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  reg.solvers[id] = std::move(fn);
}

bool has_solver(std::string_view id) {
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  return reg.solvers.find(id) != reg.solvers.end();
}

std::vector<std::string> solver_ids() {
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  std::vector<std::string> ids;
  for (const auto& [id, fn] : reg.solvers) ids.push_back(id);
  return ids;
}

LPResult solve_external(const LinearProgram& lp, std::string_view solver_id, const SolverOptions& opts) {
  SolverFn fn;
  {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    auto it = reg.solvers.find(solver_id);
    if (it == reg.solvers.end()) {
      throw Error(ErrorCode::PluginUnavailable, "no LP solver registered as '" + std::string(solver_id) + "'");
    }
    fn = it->second;
  }
  return fn(lp, opts);
}

std::string default_solver_id() {
  if (const char* env = std::getenv("CCRCI_LP_SOLVER"); env != nullptr && *env != '\0') return env;
  return "embedded";
}

namespace {

std::string mps_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string fixed_field(const std::string& s, std::size_t width) {
  std::string out = s.substr(0, width);
  out.resize(width, ' ');
  return out;
}

}  // namespace

std::string to_mps(const LinearProgram& lp, std::string_view name) {
  const auto col_name = [](int j) { return "C" + std::to_string(j); };
  const auto row_name = [](int r) { return "R" + std::to_string(r); };
  std::ostringstream os;
  os << "NAME          " << name << '\n';
  os << "ROWS\n";
  os << " N  OBJ\n";
  for (int r = 0; r < lp.num_rows(); ++r) {
    const char sense = lp.rows()[r].sense == RowSense::LessEqual      ? 'L'
                       : lp.rows()[r].sense == RowSense::GreaterEqual ? 'G'
                                                                      : 'E';
    os << ' ' << sense << "  " << row_name(r) << '\n';
  }
  // Column-major view of the row data.
  std::vector<std::vector<std::pair<int, double>>> cols(lp.num_variables());
  for (int r = 0; r < lp.num_rows(); ++r) {
    for (const auto& t : lp.rows()[r].terms) cols[t.var].emplace_back(r, t.coef);
  }
  os << "COLUMNS\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const auto line = [&](const std::string& row, double v) {
      os << "    " << fixed_field(col_name(j), 8) << "  " << fixed_field(row, 8) << "  "
         << fixed_field(mps_number(v), 12) << '\n';
    };
    if (lp.cost()[j] != 0.0) line("OBJ", lp.cost()[j]);
    for (const auto& [r, v] : cols[j]) line(row_name(r), v);
    if (lp.cost()[j] == 0.0 && cols[j].empty()) line("OBJ", 0.0);
  }
  os << "RHS\n";
  for (int r = 0; r < lp.num_rows(); ++r) {
    if (lp.rows()[r].rhs != 0.0) {
      os << "    " << fixed_field("RHS", 8) << "  " << fixed_field(row_name(r), 8) << "  "
         << fixed_field(mps_number(lp.rows()[r].rhs), 12) << '\n';
    }
  }
  os << "BOUNDS\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const double lo = lp.lower()[j], hi = lp.upper()[j];
    const auto bound = [&](const char* kind, const std::string& v) {
      os << ' ' << kind << ' ' << fixed_field("BND", 8) << "  " << fixed_field(col_name(j), 8) << "  " << v
         << '\n';
    };
    if (lo == hi) {
      bound("FX", mps_number(lo));
      continue;
    }
    if (std::isinf(lo) && std::isinf(hi)) {
      bound("FR", "");
      continue;
    }
    if (std::isinf(lo)) bound("MI", "");
    else if (lo != 0.0) bound("LO", mps_number(lo));
    if (std::isfinite(hi)) bound("UP", mps_number(hi));
  }
  os << "ENDATA\n";
  return os.str();
}

}  // namespace ccrci::lp
