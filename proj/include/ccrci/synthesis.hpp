#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccrci/cc_template.hpp"
#include "ccrci/dataset.hpp"
#include "ccrci/lp.hpp"
#include "ccrci/polytope.hpp"

namespace ccrci {

/// Everything the synthesis LP needs. Exactly one of `model_set` (data-driven
/// mode) or `true_model` (model-based mode) is consulted.
struct SynthesisProblem {
  CCTemplate tmpl;
  Polytope X, U, W;
  VertexSet P_vertices;
  std::optional<FeasibleModelSet> model_set;
  std::optional<Matrix> true_model;  // n x (n+m)s
  Matrix D;                          // directions of the size measure; usually C
  VertexSet X_vertices;

  Eigen::Index n() const { return tmpl.dim(); }
  Eigen::Index m() const { return U.dim(); }
  Eigen::Index s() const { return P_vertices.empty() ? 0 : P_vertices.front().size(); }

  /// Throws ShapeMismatch, EmptyModelSet or InvalidConfig on inconsistent data.
  void validate() const;
};

/// Fills D = C and X_vertices from X when they are empty.
SynthesisProblem make_problem(CCTemplate tmpl, Polytope X, Polytope U, Polytope W, VertexSet P_vertices);

/// How the robust invariance condition enters the LP.
///  Full: one nonnegative multiplier matrix per (vertex, scheduling vertex).
///  Separable: per state row multipliers; exact when every model-set row
///    constrains a single row of M, and far smaller.
///  Auto: Separable when applicable, Full otherwise.
enum class InvarianceForm { Auto, Full, Separable };

std::string_view to_string(InvarianceForm form);

struct SynthesisOptions {
  InvarianceForm form = InvarianceForm::Auto;
  std::string solver_id;  // empty selects lp::default_solver_id()
  lp::SolverOptions lp;
  bool keep_multipliers = true;
};

/// Constraint group tags carried by every LP row.
enum ConstraintGroup : int {
  kConfigGroup = 1,
  kSystemGroup = 2,
  kInvarianceGroup = 3,
  kVolumeGroup = 4,
};
std::string_view group_name(int group);

/// Column offsets of the synthesis variables inside the LP.
struct VariableLayout {
  int q = 0;                 // n_c entries
  int u = 0;                 // v_s blocks of m entries
  int z = 0, s = 0;          // one n-block per X vertex
  int eps = 0, tau = 0;      // m_d entries each
  Eigen::Index n_c = 0, n = 0, m = 0, v_s = 0, n_y = 0, m_d = 0;
  int u_index(Eigen::Index i) const { return u + static_cast<int>(i * m); }
};

VariableLayout add_core_variables(lp::LinearProgram& prog, const SynthesisProblem& prob);

void assemble_config_constraints(lp::LinearProgram& prog, const VariableLayout& L, const CCTemplate& t);
void assemble_system_constraints(lp::LinearProgram& prog, const VariableLayout& L, const SynthesisProblem& prob);
void assemble_volume_objective(lp::LinearProgram& prog, const VariableLayout& L, const SynthesisProblem& prob);

/// Multiplier variable bookkeeping produced by the invariance assembly.
struct InvarianceLayout {
  InvarianceForm form = InvarianceForm::Full;
  std::vector<int> model_rows;  // rows of H_bar in use
  // Full form: first column of Lambda^{ij}, stored row-major n_c x |rows|.
  std::vector<int> lambda;
  // Separable form: per (pair, state row b, sign) the first mu column and the
  // bound variable t; rows of H_bar grouped by state row.
  std::vector<std::vector<int>> rows_of_state;
  std::vector<int> mu;
  std::vector<int> bound;
};

InvarianceLayout assemble_invariance_constraints(lp::LinearProgram& prog, const VariableLayout& L,
                                                 const SynthesisProblem& prob, const Vector& d, InvarianceForm form);
void assemble_model_invariance(lp::LinearProgram& prog, const VariableLayout& L, const SynthesisProblem& prob,
                               const Vector& d);

/// True when every row of H_bar involves parameters of a single row of M.
bool is_row_separable(const FeasibleModelSet& F);

struct SynthesisDiagnostics {
  std::string mode;  // "data" or "model"
  InvarianceForm form = InvarianceForm::Full;
  std::string solver;
  int lp_rows = 0, lp_cols = 0;
  std::size_t lp_nonzeros = 0;
  long iterations = 0;
  int model_rows = 0;
  double assemble_seconds = 0.0, solve_seconds = 0.0;
};

struct RCISolution {
  Vector q;
  VertexSet vertex_states;
  VertexSet vertex_inputs;
  /// Lambda^{ij} at index i * v_p + j, columns aligned with `multiplier_rows`.
  std::vector<Matrix> multipliers;
  std::vector<int> multiplier_rows;
  Vector epsilon;
  Vector d;
  double objective = 0.0;
  std::optional<double> volume;
  SynthesisDiagnostics diagnostics;
};

struct InfeasibilityReport {
  std::vector<std::pair<int, int>> group_counts;  // (group, rows still violated)
  std::string summary() const;
};

enum class SynthesisStatus { Optimal, Infeasible };

struct SynthesisResult {
  SynthesisStatus status = SynthesisStatus::Infeasible;
  RCISolution solution;  // meaningful when Optimal
  InfeasibilityReport infeasibility;
  SynthesisDiagnostics diagnostics;
  bool optimal() const { return status == SynthesisStatus::Optimal; }
  /// Returns the solution or throws Error(SynthesisInfeasible).
  const RCISolution& require() const;
};

/// The complete synthesis LP together with its variable layout.
struct AssembledSynthesis {
  lp::LinearProgram prog;
  VariableLayout layout;
  std::optional<InvarianceLayout> invariance;  // absent in model-based mode
  Vector d;
};

AssembledSynthesis assemble_synthesis(const SynthesisProblem& prob, InvarianceForm form = InvarianceForm::Auto);
AssembledSynthesis assemble_model_synthesis(const SynthesisProblem& prob, const Matrix& M_true);

/// Data-driven synthesis over prob.model_set. Throws NumericalBreakdown when
/// the LP solver stops without a verdict.
SynthesisResult synthesize(const SynthesisProblem& prob, const SynthesisOptions& opts = {});
/// Invariance imposed with the fixed model M_true (no multipliers).
SynthesisResult synthesize_model_based(const SynthesisProblem& prob, const Matrix& M_true,
                                       const SynthesisOptions& opts = {});

/// Regressor of vertex i under scheduling vertex j.
Vector vertex_regressor(const RCISolution& sol, const SynthesisProblem& prob, Eigen::Index i, Eigen::Index j);

struct InvarianceReport {
  /// Worst slack q_k - d_k - max_M C_k M z^{ij} per facet k.
  Vector facet_slack;
  double min_slack = 0.0;
  int worst_facet = -1, worst_vertex = -1, worst_schedule = -1;
  int lp_count = 0;
  bool passed(double tol = 1e-6) const { return min_slack >= -tol; }
};

/// One LP per (vertex, scheduling vertex, facet) over the full unreduced
/// model set. With `singleton` set, the model set is {singleton} instead.
InvarianceReport verify_invariance(const RCISolution& sol, const SynthesisProblem& prob,
                                   const std::optional<Matrix>& singleton = std::nullopt);

struct CertificateReport {
  double config = 0.0;      // max of E q
  double state = 0.0;       // max of H_x V^i q - h_x
  double input = 0.0;       // max of H_u u^i - h_u
  double multiplier = 0.0;  // max of -Lambda
  double multiplier_equality = 0.0;  // max residual of Lambda H_bar = z' (x) C_k
  double multiplier_bound = 0.0;     // max of Lambda h_bar - q + d
  bool passed(double tol = 1e-7) const;
};

CertificateReport check_certificate(const RCISolution& sol, const SynthesisProblem& prob);

/// Area of S(q) for n = 2 (vertex enumeration).
double solution_volume(const CCTemplate& t, const Vector& q);

}  // namespace ccrci
