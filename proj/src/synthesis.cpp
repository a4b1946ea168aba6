#include "ccrci/synthesis.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "ccrci/error.hpp"

namespace ccrci {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr double kDropCoefficient = 1e-12;

void push_term(lp::SparseRow& row, int var, double coef) {
  if (std::abs(coef) > kDropCoefficient) row.push_back({var, coef});
}

// z^{ij} = [p (x) V^i q; p (x) u^i], one sparse row over (q, u^i) per entry.
std::vector<lp::SparseRow> regressor_rows(const VariableLayout& L, const Matrix& V, const Vector& p, Eigen::Index i) {
  const Eigen::Index s = p.size();
  std::vector<lp::SparseRow> rows;
  rows.reserve(static_cast<std::size_t>((L.n + L.m) * s));
  for (Eigen::Index jj = 0; jj < s; ++jj) {
    for (Eigen::Index r = 0; r < L.n; ++r) {
      lp::SparseRow row;
      if (p(jj) != 0.0) {
        for (Eigen::Index c = 0; c < L.n_c; ++c) push_term(row, L.q + static_cast<int>(c), p(jj) * V(r, c));
      }
      rows.push_back(std::move(row));
    }
  }
  for (Eigen::Index jj = 0; jj < s; ++jj) {
    for (Eigen::Index r = 0; r < L.m; ++r) {
      lp::SparseRow row;
      if (p(jj) != 0.0) row.push_back({L.u_index(i) + static_cast<int>(r), p(jj)});
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// Appends coef * expr to row.
void append_scaled(lp::SparseRow& row, const lp::SparseRow& expr, double coef) {
  if (std::abs(coef) <= kDropCoefficient) return;
  for (const auto& term : expr) row.push_back({term.var, coef * term.coef});
}

// Merges repeated variables and drops coefficients that cancel to noise.
void compact(lp::SparseRow& row) {
  std::sort(row.begin(), row.end(), [](const lp::Term& a, const lp::Term& b) { return a.var < b.var; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < row.size();) {
    const int var = row[i].var;
    double coef = 0.0;
    for (; i < row.size() && row[i].var == var; ++i) coef += row[i].coef;
    if (std::abs(coef) > kDropCoefficient) row[out++] = {var, coef};
  }
  row.resize(out);
}

int state_row_of_param(Eigen::Index param, Eigen::Index n) { return static_cast<int>(param % n); }

bool model_set_nonempty(const Matrix& H, const Vector& h, const std::vector<int>& rows) {
  lp::LinearProgram prog;
  prog.add_variables(static_cast<int>(H.cols()));
  for (int r : rows) {
    lp::SparseRow terms;
    for (Eigen::Index c = 0; c < H.cols(); ++c) push_term(terms, static_cast<int>(c), H(r, c));
    if (terms.empty()) {
      if (h(r) < 0.0) return false;
      continue;
    }
    prog.add_le(std::move(terms), h(r));
  }
  return lp::solve(prog).status != lp::Status::Infeasible;
}

lp::LPResult run_solver(const lp::LinearProgram& prog, const SynthesisOptions& opts, std::string& used) {
  used = opts.solver_id.empty() ? lp::default_solver_id() : opts.solver_id;
  return lp::solve_external(prog, used, opts.lp);
}

}  // namespace

std::string_view to_string(InvarianceForm form) {
  switch (form) {
    case InvarianceForm::Auto: return "auto";
    case InvarianceForm::Full: return "full";
    case InvarianceForm::Separable: return "separable";
  }
  return "unknown";
}

std::string_view group_name(int group) {
  switch (group) {
    case kConfigGroup: return "configuration";
    case kSystemGroup: return "state/input";
    case kInvarianceGroup: return "invariance";
    case kVolumeGroup: return "volume";
    default: return "other";
  }
}

void SynthesisProblem::validate() const {
  const Eigen::Index n_ = n();
  if (tmpl.num_vertices() == 0) throw Error(ErrorCode::InvalidConfig, "template has no vertices");
  if (X.dim() != n_ || W.dim() != n_) throw Error(ErrorCode::ShapeMismatch, "X and W must match the template dimension");
  if (U.dim() == 0) throw Error(ErrorCode::ShapeMismatch, "input set has dimension zero");
  if (P_vertices.empty()) throw Error(ErrorCode::InvalidConfig, "scheduling set has no vertices");
  for (const auto& p : P_vertices) {
    if (p.size() != s()) throw Error(ErrorCode::ShapeMismatch, "scheduling vertices differ in size");
  }
  if (D.cols() != n_ || D.rows() == 0) throw Error(ErrorCode::ShapeMismatch, "direction matrix D has wrong shape");
  if (X_vertices.empty()) throw Error(ErrorCode::InvalidConfig, "X vertex list is empty");
  const Eigen::Index params = n_ * (n_ + m()) * s();
  if (model_set) {
    if (model_set->num_params() != params || model_set->n != n_ || model_set->m != m() || model_set->s != s()) {
      throw Error(ErrorCode::ShapeMismatch, "model set dimensions do not match the problem");
    }
  }
  if (true_model && (true_model->rows() != n_ || true_model->cols() != (n_ + m()) * s())) {
    throw Error(ErrorCode::ShapeMismatch, "model matrix must be n x (n+m)s");
  }
}

SynthesisProblem make_problem(CCTemplate tmpl, Polytope X, Polytope U, Polytope W, VertexSet P_vertices) {
  SynthesisProblem prob;
  prob.D = tmpl.C;
  prob.tmpl = std::move(tmpl);
  prob.X_vertices = enumerate_vertices(X);
  prob.X = std::move(X);
  prob.U = std::move(U);
  prob.W = std::move(W);
  prob.P_vertices = std::move(P_vertices);
  return prob;
}

VariableLayout add_core_variables(lp::LinearProgram& prog, const SynthesisProblem& prob) {
  VariableLayout L;
  L.n_c = prob.tmpl.num_facets();
  L.n = prob.n();
  L.m = prob.m();
  L.v_s = prob.tmpl.num_vertices();
  L.n_y = static_cast<Eigen::Index>(prob.X_vertices.size());
  L.m_d = prob.D.rows();
  L.q = prog.add_variables(static_cast<int>(L.n_c));
  L.u = prog.add_variables(static_cast<int>(L.v_s * L.m));
  L.z = prog.add_variables(static_cast<int>(L.n_y * L.n));
  L.s = prog.add_variables(static_cast<int>(L.n_y * L.n));
  L.eps = prog.add_variables(static_cast<int>(L.m_d));
  L.tau = prog.add_variables(static_cast<int>(L.m_d), 0.0, lp::kInf, 1.0);
  return L;
}

void assemble_config_constraints(lp::LinearProgram& prog, const VariableLayout& L, const CCTemplate& t) {
  for (Eigen::Index r = 0; r < t.E.rows(); ++r) {
    lp::SparseRow row;
    for (Eigen::Index c = 0; c < t.E.cols(); ++c) push_term(row, L.q + static_cast<int>(c), t.E(r, c));
    prog.add_le(std::move(row), 0.0, kConfigGroup);
  }
}

void assemble_system_constraints(lp::LinearProgram& prog, const VariableLayout& L, const SynthesisProblem& prob) {
  const Matrix& Hx = prob.X.H();
  const Matrix& Hu = prob.U.H();
  for (Eigen::Index i = 0; i < L.v_s; ++i) {
    const Matrix HV = Hx * prob.tmpl.V_maps[i];
    for (Eigen::Index r = 0; r < HV.rows(); ++r) {
      lp::SparseRow row;
      for (Eigen::Index c = 0; c < HV.cols(); ++c) push_term(row, L.q + static_cast<int>(c), HV(r, c));
      prog.add_le(std::move(row), prob.X.h()(r), kSystemGroup);
    }
    for (Eigen::Index r = 0; r < Hu.rows(); ++r) {
      lp::SparseRow row;
      for (Eigen::Index c = 0; c < L.m; ++c) push_term(row, L.u_index(i) + static_cast<int>(c), Hu(r, c));
      prog.add_le(std::move(row), prob.U.h()(r), kSystemGroup);
    }
  }
}

void assemble_volume_objective(lp::LinearProgram& prog, const VariableLayout& L, const SynthesisProblem& prob) {
  const Matrix& C = prob.tmpl.C;
  const Matrix& D = prob.D;
  for (Eigen::Index l = 0; l < L.n_y; ++l) {
    const int z = L.z + static_cast<int>(l * L.n);
    const int s = L.s + static_cast<int>(l * L.n);
    for (Eigen::Index r = 0; r < L.n; ++r) {
      prog.add_eq({{z + static_cast<int>(r), 1.0}, {s + static_cast<int>(r), 1.0}}, prob.X_vertices[l](r), kVolumeGroup);
    }
    for (Eigen::Index k = 0; k < L.m_d; ++k) {
      lp::SparseRow row;
      for (Eigen::Index r = 0; r < L.n; ++r) push_term(row, z + static_cast<int>(r), D(k, r));
      row.push_back({L.eps + static_cast<int>(k), -1.0});
      prog.add_le(std::move(row), 0.0, kVolumeGroup);
    }
    for (Eigen::Index k = 0; k < L.n_c; ++k) {
      lp::SparseRow row;
      for (Eigen::Index r = 0; r < L.n; ++r) push_term(row, s + static_cast<int>(r), C(k, r));
      row.push_back({L.q + static_cast<int>(k), -1.0});
      prog.add_le(std::move(row), 0.0, kVolumeGroup);
    }
  }
  for (Eigen::Index k = 0; k < L.m_d; ++k) {
    const int e = L.eps + static_cast<int>(k);
    const int t = L.tau + static_cast<int>(k);
    prog.add_ge({{t, 1.0}, {e, -1.0}}, 0.0, kVolumeGroup);
    prog.add_ge({{t, 1.0}, {e, 1.0}}, 0.0, kVolumeGroup);
  }
}

bool is_row_separable(const FeasibleModelSet& F) {
  for (int r : F.active_rows()) {
    int owner = -1;
    for (Eigen::Index c = 0; c < F.H_bar.cols(); ++c) {
      if (F.H_bar(r, c) == 0.0) continue;
      const int b = state_row_of_param(c, F.n);
      if (owner >= 0 && owner != b) return false;
      owner = b;
    }
  }
  return true;
}

InvarianceLayout assemble_invariance_constraints(lp::LinearProgram& prog, const VariableLayout& L,
                                                 const SynthesisProblem& prob, const Vector& d, InvarianceForm form) {
  if (!prob.model_set) throw Error(ErrorCode::EmptyModelSet, "data-driven synthesis needs a model set");
  const FeasibleModelSet& F = *prob.model_set;
  const Matrix& H = F.H_bar;
  const Vector& h = F.h_bar;
  const Matrix& C = prob.tmpl.C;

  InvarianceLayout out;
  for (int r : F.active_rows()) {
    if (H.row(r).cwiseAbs().maxCoeff() > 0.0) out.model_rows.push_back(r);
  }
  if (out.model_rows.empty() || !model_set_nonempty(H, h, out.model_rows)) {
    throw Error(ErrorCode::EmptyModelSet, "no model is consistent with the data");
  }
  if (form == InvarianceForm::Auto) form = is_row_separable(F) ? InvarianceForm::Separable : InvarianceForm::Full;
  if (form == InvarianceForm::Separable && !is_row_separable(F)) {
    throw Error(ErrorCode::InvalidConfig, "model set is not row-separable; use the full invariance form");
  }
  out.form = form;

  const Eigen::Index n = L.n;
  const Eigen::Index params = H.cols();
  const Eigen::Index regs = params / n;
  const auto r_count = static_cast<int>(out.model_rows.size());
  const auto v_p = static_cast<Eigen::Index>(prob.P_vertices.size());

  if (form == InvarianceForm::Full) {
    for (Eigen::Index i = 0; i < L.v_s; ++i) {
      for (Eigen::Index j = 0; j < v_p; ++j) {
        const auto z = regressor_rows(L, prob.tmpl.V_maps[i], prob.P_vertices[j], i);
        const int lam = prog.add_variables(static_cast<int>(L.n_c) * r_count, 0.0, lp::kInf);
        out.lambda.push_back(lam);
        for (Eigen::Index k = 0; k < L.n_c; ++k) {
          const int base = lam + static_cast<int>(k) * r_count;
          lp::SparseRow bound;
          for (int a = 0; a < r_count; ++a) push_term(bound, base + a, h(out.model_rows[a]));
          bound.push_back({L.q + static_cast<int>(k), -1.0});
          prog.add_le(std::move(bound), -d(k), kInvarianceGroup);
          for (Eigen::Index c = 0; c < params; ++c) {
            lp::SparseRow eq;
            for (int a = 0; a < r_count; ++a) push_term(eq, base + a, H(out.model_rows[a], c));
            append_scaled(eq, z[c / n], -C(k, c % n));
            compact(eq);
            if (!eq.empty()) prog.add_eq(std::move(eq), 0.0, kInvarianceGroup);
          }
        }
      }
    }
    return out;
  }

  // Separable form: max over M of C_k M z splits into per-state-row maxima.
  out.rows_of_state.assign(static_cast<std::size_t>(n), {});
  for (int r : out.model_rows) {
    Eigen::Index c = 0;
    H.row(r).cwiseAbs().maxCoeff(&c);
    out.rows_of_state[state_row_of_param(c, n)].push_back(r);
  }
  std::vector<std::array<bool, 2>> used(static_cast<std::size_t>(n), {false, false});
  for (Eigen::Index k = 0; k < L.n_c; ++k) {
    for (Eigen::Index b = 0; b < n; ++b) {
      if (C(k, b) > 0.0) used[b][0] = true;
      if (C(k, b) < 0.0) used[b][1] = true;
    }
  }
  for (Eigen::Index i = 0; i < L.v_s; ++i) {
    for (Eigen::Index j = 0; j < v_p; ++j) {
      const auto z = regressor_rows(L, prob.tmpl.V_maps[i], prob.P_vertices[j], i);
      std::vector<std::array<int, 2>> t_var(static_cast<std::size_t>(n), {-1, -1});
      for (Eigen::Index b = 0; b < n; ++b) {
        const auto& rows = out.rows_of_state[b];
        for (int sg = 0; sg < 2; ++sg) {
          if (!used[b][sg]) {
            out.mu.push_back(-1);
            out.bound.push_back(-1);
            continue;
          }
          const double sign = sg == 0 ? 1.0 : -1.0;
          const int mu = prog.add_variables(static_cast<int>(rows.size()), 0.0, lp::kInf);
          const int t = prog.add_variable();
          out.mu.push_back(mu);
          out.bound.push_back(t);
          t_var[b][sg] = t;
          for (Eigen::Index a = 0; a < regs; ++a) {
            const Eigen::Index c = a * n + b;
            lp::SparseRow eq;
            for (std::size_t e = 0; e < rows.size(); ++e) push_term(eq, mu + static_cast<int>(e), H(rows[e], c));
            append_scaled(eq, z[a], -sign);
            compact(eq);
            if (!eq.empty()) prog.add_eq(std::move(eq), 0.0, kInvarianceGroup);
          }
          lp::SparseRow cap;
          for (std::size_t e = 0; e < rows.size(); ++e) push_term(cap, mu + static_cast<int>(e), h(rows[e]));
          cap.push_back({t, -1.0});
          prog.add_le(std::move(cap), 0.0, kInvarianceGroup);
        }
      }
      for (Eigen::Index k = 0; k < L.n_c; ++k) {
        lp::SparseRow row;
        for (Eigen::Index b = 0; b < n; ++b) {
          if (C(k, b) == 0.0) continue;
          row.push_back({t_var[b][C(k, b) > 0.0 ? 0 : 1], std::abs(C(k, b))});
        }
        row.push_back({L.q + static_cast<int>(k), -1.0});
        prog.add_le(std::move(row), -d(k), kInvarianceGroup);
      }
    }
  }
  return out;
}

void assemble_model_invariance(lp::LinearProgram& prog, const VariableLayout& L, const SynthesisProblem& prob,
                               const Vector& d) {
  const Matrix& M = *prob.true_model;
  const Matrix CM = prob.tmpl.C * M;
  for (Eigen::Index i = 0; i < L.v_s; ++i) {
    for (const auto& p : prob.P_vertices) {
      const auto z = regressor_rows(L, prob.tmpl.V_maps[i], p, i);
      for (Eigen::Index k = 0; k < L.n_c; ++k) {
        lp::SparseRow row;
        for (Eigen::Index a = 0; a < CM.cols(); ++a) append_scaled(row, z[a], CM(k, a));
        compact(row);
        row.push_back({L.q + static_cast<int>(k), -1.0});
        prog.add_le(std::move(row), -d(k), kInvarianceGroup);
      }
    }
  }
}

namespace {

InfeasibilityReport classify_infeasibility(const lp::LinearProgram& prog, const lp::LPResult& res) {
  std::map<int, int> counts;
  for (int r : res.infeasible_rows) ++counts[prog.rows()[r].group];
  InfeasibilityReport report;
  for (const auto& [g, c] : counts) report.group_counts.emplace_back(g, c);
  return report;
}

SynthesisResult solve_and_extract(lp::LinearProgram& prog, const VariableLayout& L, const SynthesisProblem& prob,
                                  const Vector& d, const InvarianceLayout* inv, const SynthesisOptions& opts,
                                  SynthesisDiagnostics diag, Clock::time_point start) {
  diag.lp_rows = prog.num_rows();
  diag.lp_cols = prog.num_variables();
  diag.lp_nonzeros = prog.num_nonzeros();
  diag.assemble_seconds = seconds_since(start);
  const auto solve_start = Clock::now();
  const lp::LPResult res = run_solver(prog, opts, diag.solver);
  diag.solve_seconds = seconds_since(solve_start);
  diag.iterations = res.iterations;

  SynthesisResult out;
  out.diagnostics = diag;
  if (res.status == lp::Status::Infeasible) {
    out.status = SynthesisStatus::Infeasible;
    out.infeasibility = classify_infeasibility(prog, res);
    return out;
  }
  if (res.status != lp::Status::Optimal) {
    throw Error(ErrorCode::NumericalBreakdown, std::string("synthesis LP ended with status ") +
                                                   std::string(lp::to_string(res.status)));
  }

  RCISolution& sol = out.solution;
  const auto& x = res.x;
  sol.q = Eigen::Map<const Vector>(x.data() + L.q, L.n_c);
  sol.epsilon = Eigen::Map<const Vector>(x.data() + L.eps, L.m_d);
  sol.d = d;
  sol.objective = sol.epsilon.lpNorm<1>();
  for (Eigen::Index i = 0; i < L.v_s; ++i) {
    sol.vertex_states.push_back(prob.tmpl.V_maps[i] * sol.q);
    sol.vertex_inputs.push_back(Eigen::Map<const Vector>(x.data() + L.u_index(i), L.m));
  }
  if (L.n == 2) sol.volume = solution_volume(prob.tmpl, sol.q);

  if (inv && opts.keep_multipliers) {
    const auto r_count = static_cast<Eigen::Index>(inv->model_rows.size());
    sol.multiplier_rows = inv->model_rows;
    std::map<int, Eigen::Index> column_of;
    for (Eigen::Index a = 0; a < r_count; ++a) column_of[inv->model_rows[a]] = a;
    const auto pairs = static_cast<std::size_t>(L.v_s) * prob.P_vertices.size();
    for (std::size_t pair = 0; pair < pairs; ++pair) {
      Matrix lam = Matrix::Zero(L.n_c, r_count);
      if (inv->form == InvarianceForm::Full) {
        for (Eigen::Index k = 0; k < L.n_c; ++k) {
          for (Eigen::Index a = 0; a < r_count; ++a) lam(k, a) = x[inv->lambda[pair] + k * r_count + a];
        }
      } else {
        const auto n = static_cast<std::size_t>(L.n);
        for (Eigen::Index k = 0; k < L.n_c; ++k) {
          for (std::size_t b = 0; b < n; ++b) {
            const double ckb = prob.tmpl.C(k, static_cast<Eigen::Index>(b));
            if (ckb == 0.0) continue;
            const int mu = inv->mu[(pair * n + b) * 2 + (ckb > 0.0 ? 0 : 1)];
            const auto& rows = inv->rows_of_state[b];
            for (std::size_t e = 0; e < rows.size(); ++e) lam(k, column_of[rows[e]]) += std::abs(ckb) * x[mu + e];
          }
        }
      }
      sol.multipliers.push_back(std::move(lam));
    }
  }
  sol.diagnostics = diag;
  out.status = SynthesisStatus::Optimal;
  return out;
}

}  // namespace

std::string InfeasibilityReport::summary() const {
  if (group_counts.empty()) return "no constraint group identified";
  std::string out;
  for (const auto& [g, c] : group_counts) {
    if (!out.empty()) out += ", ";
    out += std::string(group_name(g)) + ": " + std::to_string(c) + " rows";
  }
  return out;
}

const RCISolution& SynthesisResult::require() const {
  if (!optimal()) {
    throw Error(ErrorCode::SynthesisInfeasible, "no RCI set exists for this template and data (" +
                                                    infeasibility.summary() + ")");
  }
  return solution;
}

AssembledSynthesis assemble_synthesis(const SynthesisProblem& prob, InvarianceForm form) {
  prob.validate();
  if (!prob.model_set) throw Error(ErrorCode::EmptyModelSet, "data-driven synthesis needs a model set");
  AssembledSynthesis out;
  out.d = support_vector(prob.tmpl.C, prob.W);
  out.layout = add_core_variables(out.prog, prob);
  assemble_config_constraints(out.prog, out.layout, prob.tmpl);
  assemble_system_constraints(out.prog, out.layout, prob);
  out.invariance = assemble_invariance_constraints(out.prog, out.layout, prob, out.d, form);
  assemble_volume_objective(out.prog, out.layout, prob);
  out.prog.compress();
  return out;
}

AssembledSynthesis assemble_model_synthesis(const SynthesisProblem& prob_in, const Matrix& M_true) {
  SynthesisProblem prob = prob_in;
  prob.true_model = M_true;
  prob.validate();
  AssembledSynthesis out;
  out.d = support_vector(prob.tmpl.C, prob.W);
  out.layout = add_core_variables(out.prog, prob);
  assemble_config_constraints(out.prog, out.layout, prob.tmpl);
  assemble_system_constraints(out.prog, out.layout, prob);
  assemble_model_invariance(out.prog, out.layout, prob, out.d);
  assemble_volume_objective(out.prog, out.layout, prob);
  out.prog.compress();
  return out;
}

SynthesisResult synthesize(const SynthesisProblem& prob, const SynthesisOptions& opts) {
  const auto start = Clock::now();
  AssembledSynthesis a = assemble_synthesis(prob, opts.form);
  SynthesisDiagnostics diag;
  diag.mode = "data";
  diag.form = a.invariance->form;
  diag.model_rows = static_cast<int>(a.invariance->model_rows.size());
  return solve_and_extract(a.prog, a.layout, prob, a.d, &*a.invariance, opts, diag, start);
}

SynthesisResult synthesize_model_based(const SynthesisProblem& prob, const Matrix& M_true,
                                       const SynthesisOptions& opts) {
  const auto start = Clock::now();
  AssembledSynthesis a = assemble_model_synthesis(prob, M_true);
  SynthesisDiagnostics diag;
  diag.mode = "model";
  return solve_and_extract(a.prog, a.layout, prob, a.d, nullptr, opts, diag, start);
}

Vector vertex_regressor(const RCISolution& sol, const SynthesisProblem& prob, Eigen::Index i, Eigen::Index j) {
  return linops::lpv_regressor(prob.P_vertices[j], sol.vertex_states[i], sol.vertex_inputs[i]);
}

InvarianceReport verify_invariance(const RCISolution& sol, const SynthesisProblem& prob,
                                   const std::optional<Matrix>& singleton) {
  const Matrix& C = prob.tmpl.C;
  const Eigen::Index n_c = C.rows();
  const Eigen::Index n = C.cols();
  const Vector d = support_vector(C, prob.W);
  InvarianceReport report;
  report.facet_slack = Vector::Constant(n_c, std::numeric_limits<double>::infinity());
  report.min_slack = std::numeric_limits<double>::infinity();

  lp::LinearProgram base;
  if (!singleton) {
    if (!prob.model_set) throw Error(ErrorCode::EmptyModelSet, "verification needs a model set or a fixed model");
    const Matrix& H = prob.model_set->H_bar;
    const Vector& h = prob.model_set->h_bar;
    base.add_variables(static_cast<int>(H.cols()));
    for (Eigen::Index r = 0; r < H.rows(); ++r) {
      lp::SparseRow row;
      for (Eigen::Index c = 0; c < H.cols(); ++c) {
        if (H(r, c) != 0.0) row.push_back({static_cast<int>(c), H(r, c)});
      }
      if (!row.empty()) base.add_le(std::move(row), h(r));
    }
  }

  for (std::size_t i = 0; i < sol.vertex_states.size(); ++i) {
    for (std::size_t j = 0; j < prob.P_vertices.size(); ++j) {
      const Vector z = vertex_regressor(sol, prob, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const Vector succ = singleton ? Vector(*singleton * z) : Vector();
      for (Eigen::Index k = 0; k < n_c; ++k) {
        double worst = 0.0;
        if (singleton) {
          worst = C.row(k).dot(succ);
        } else {
          lp::LinearProgram prog = base;
          // Objective z' (x) C_k over vec(M), negated for minimization.
          for (Eigen::Index a = 0; a < z.size(); ++a) {
            for (Eigen::Index b = 0; b < n; ++b) prog.set_cost(static_cast<int>(a * n + b), -z(a) * C(k, b));
          }
          const auto res = lp::solve(prog);
          ++report.lp_count;
          if (res.status == lp::Status::Infeasible) throw Error(ErrorCode::EmptyModelSet, "model set is empty");
          worst = res.status == lp::Status::Optimal ? -res.objective_value : std::numeric_limits<double>::infinity();
          if (res.status == lp::Status::IterationLimit) {
            throw Error(ErrorCode::NumericalBreakdown, "verification LP hit the iteration limit");
          }
        }
        const double slack = sol.q(k) - d(k) - worst;
        report.facet_slack(k) = std::min(report.facet_slack(k), slack);
        if (slack < report.min_slack) {
          report.min_slack = slack;
          report.worst_facet = static_cast<int>(k);
          report.worst_vertex = static_cast<int>(i);
          report.worst_schedule = static_cast<int>(j);
        }
      }
    }
  }
  return report;
}

bool CertificateReport::passed(double tol) const {
  return config <= tol && state <= tol && input <= tol && multiplier <= tol && multiplier_equality <= tol &&
         multiplier_bound <= tol;
}

CertificateReport check_certificate(const RCISolution& sol, const SynthesisProblem& prob) {
  CertificateReport rep;
  const CCTemplate& t = prob.tmpl;
  rep.config = std::max(0.0, t.configuration_violation(sol.q));
  for (std::size_t i = 0; i < sol.vertex_states.size(); ++i) {
    rep.state = std::max(rep.state, (prob.X.H() * (t.V_maps[i] * sol.q) - prob.X.h()).maxCoeff());
    rep.input = std::max(rep.input, (prob.U.H() * sol.vertex_inputs[i] - prob.U.h()).maxCoeff());
  }
  if (!sol.multipliers.empty() && prob.model_set) {
    const Matrix& H = prob.model_set->H_bar;
    const Vector& h = prob.model_set->h_bar;
    Matrix Hr(static_cast<Eigen::Index>(sol.multiplier_rows.size()), H.cols());
    Vector hr(Hr.rows());
    for (Eigen::Index a = 0; a < Hr.rows(); ++a) {
      Hr.row(a) = H.row(sol.multiplier_rows[a]);
      hr(a) = h(sol.multiplier_rows[a]);
    }
    const auto v_p = prob.P_vertices.size();
    for (std::size_t pair = 0; pair < sol.multipliers.size(); ++pair) {
      const Matrix& lam = sol.multipliers[pair];
      const auto i = static_cast<Eigen::Index>(pair / v_p);
      const auto j = static_cast<Eigen::Index>(pair % v_p);
      const Vector z = vertex_regressor(sol, prob, i, j);
      rep.multiplier = std::max(rep.multiplier, -lam.minCoeff());
      const Matrix lhs = lam * Hr;
      for (Eigen::Index k = 0; k < lam.rows(); ++k) {
        const Vector target = linops::kron(z.transpose(), t.C.row(k)).transpose();
        rep.multiplier_equality = std::max(rep.multiplier_equality, (lhs.row(k).transpose() - target).cwiseAbs().maxCoeff());
      }
      rep.multiplier_bound = std::max(rep.multiplier_bound, (lam * hr - sol.q + sol.d).maxCoeff());
    }
  }
  return rep;
}

double solution_volume(const CCTemplate& t, const Vector& q) {
  if (t.dim() != 2) throw Error(ErrorCode::ShapeMismatch, "area is defined for planar sets only");
  VertexSet vertices;
  try {
    vertices = enumerate_vertices(t.polytope(q));
    return volume_2d(vertices);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateHull) return 0.0;
    throw;
  }
}

}  // namespace ccrci
