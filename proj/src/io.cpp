#include "ccrci/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "ccrci/error.hpp"
#include "json.hpp"

namespace ccrci::io {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& where, const std::string& msg) {
  throw Error(ErrorCode::InvalidConfig, where + ": " + msg);
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      bad(where, "unknown field '" + it.key() + "'");
  }
}

const json& need(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) bad(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) bad(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(where, "expected a finite number");
  return x;
}

long integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) bad(where, "expected an integer");
  return v.get<long>();
}

long positive(const json& v, const std::string& where) {
  const long x = integer(v, where);
  if (x <= 0) bad(where, "expected a positive integer");
  return x;
}

std::uint64_t seed_value(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) bad(where, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool boolean(const json& v, const std::string& where) {
  if (!v.is_boolean()) bad(where, "expected true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& where) {
  if (!v.is_string()) bad(where, "expected a string");
  return v.get<std::string>();
}

Vector vector_of(const json& v, const std::string& where) {
  if (!v.is_array()) bad(where, "expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = number(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

Matrix matrix_of(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) bad(where, "expected a nonempty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  if (cols == 0) bad(where, "rows must be nonempty arrays");
  Matrix out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < v.size(); ++r) {
    const Vector row = vector_of(v[r], where + "[" + std::to_string(r) + "]");
    if (static_cast<std::size_t>(row.size()) != cols)
      throw Error(ErrorCode::ShapeMismatch, where + ": ragged matrix rows");
    out.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return out;
}

VertexSet points_of(const json& v, const std::string& where) {
  const Matrix m = matrix_of(v, where);
  VertexSet out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(m.row(r).transpose());
  return out;
}

Polytope set_of(const json& v, const std::string& where) {
  check_keys(v, {"H", "h"}, where);
  Matrix H = matrix_of(need(v, "H", where), where + ".H");
  Vector h = vector_of(need(v, "h", where), where + ".h");
  if (H.rows() != h.size()) throw Error(ErrorCode::ShapeMismatch, where + ": H and h row counts differ");
  return Polytope(std::move(H), std::move(h));
}

ojson vector_json(const Vector& v) {
  ojson out = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i) == 0.0 ? 0.0 : v(i));
  return out;
}

ojson matrix_json(const Matrix& m) {
  ojson out = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

ojson points_json(const VertexSet& pts) {
  ojson out = ojson::array();
  for (const Vector& p : pts) out.push_back(vector_json(p));
  return out;
}

ojson set_json(const Polytope& P) {
  ojson out;
  out["H"] = matrix_json(P.H());
  out["h"] = vector_json(P.h());
  return out;
}

std::string_view disturbance_name(DisturbanceMode m) { return m == DisturbanceMode::Uniform ? "uniform" : "vertex"; }

DisturbanceMode disturbance_of(const json& v, const std::string& where) {
  const std::string s = text(v, where);
  if (s == "uniform") return DisturbanceMode::Uniform;
  if (s == "vertex") return DisturbanceMode::Vertex;
  bad(where, "expected \"uniform\" or \"vertex\"");
}

ControllerMode controller_of(const json& v, const std::string& where) {
  const std::string s = text(v, where);
  if (s == "convex") return ControllerMode::Convex;
  if (s == "min_sum") return ControllerMode::MinSum;
  bad(where, "expected \"convex\" or \"min_sum\"");
}

InvarianceForm form_of(const json& v, const std::string& where) {
  const std::string s = text(v, where);
  if (s == "auto") return InvarianceForm::Auto;
  if (s == "full") return InvarianceForm::Full;
  if (s == "separable") return InvarianceForm::Separable;
  bad(where, "expected \"auto\", \"full\" or \"separable\"");
}

PlantModel plant_of(const json& v) {
  if (v.is_string()) return build_example_plant(v.get<std::string>()).plant;
  check_keys(v, {"A", "B"}, "plant");
  const json& A = need(v, "A", "plant");
  const json& B = need(v, "B", "plant");
  if (!A.is_array() || !B.is_array() || A.empty() || A.size() != B.size())
    throw Error(ErrorCode::ShapeMismatch, "plant: A and B must be equally long nonempty lists of matrices");
  PlantModel p;
  for (std::size_t j = 0; j < A.size(); ++j) {
    p.A.push_back(matrix_of(A[j], "plant.A[" + std::to_string(j) + "]"));
    p.B.push_back(matrix_of(B[j], "plant.B[" + std::to_string(j) + "]"));
    if (p.A[j].rows() != p.A[j].cols() || p.B[j].rows() != p.A[j].rows() || p.A[j].rows() != p.A[0].rows() ||
        p.B[j].cols() != p.B[0].cols())
      throw Error(ErrorCode::ShapeMismatch, "plant: inconsistent A/B shapes");
  }
  return p;
}

json parse_json(std::string_view text_in, const char* what) {
  try {
    return json::parse(text_in.begin(), text_in.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

void check_schema(const json& root, const char* what) {
  const long schema = integer(need(root, "schema", what), std::string(what) + ".schema");
  if (schema != kSchemaVersion)
    bad(what, "unsupported schema " + std::to_string(schema) + " (expected " + std::to_string(kSchemaVersion) + ")");
}

bool is_flat(const ojson& j) {
  return std::none_of(j.begin(), j.end(), [](const ojson& e) { return e.is_structured(); });
}

// Two-space indentation with arrays of scalars kept on one line.
void pretty(const ojson& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad + ojson(it.key()).dump() + ": ";
      pretty(it.value(), indent + 2, out);
    }
    out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "}";
  } else if (j.is_array() && !j.empty() && !is_flat(j)) {
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      pretty(j[i], indent + 2, out);
    }
    out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "]";
  } else if (j.is_array()) {
    out += "[";
    for (std::size_t i = 0; i < j.size(); ++i) out += (i ? ", " : "") + j[i].dump();
    out += "]";
  } else {
    out += j.dump();
  }
}

std::string pretty(const ojson& j) {
  std::string out;
  pretty(j, 0, out);
  return out + "\n";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);
  return buf;
}

}  // namespace

ProblemConfig parse_config(std::string_view json_text) {
  const json root = parse_json(json_text, "config");
  check_keys(root, {"schema", "name", "plant", "X", "U", "W", "P_vertices", "template", "D", "scheduling", "solver",
                    "reduce", "data", "simulation"},
             "config");
  check_schema(root, "config");

  ProblemConfig cfg;
  if (root.contains("name")) cfg.name = text(root["name"], "name");
  if (root.contains("plant")) cfg.plant = plant_of(root["plant"]);
  cfg.X = set_of(need(root, "X", "config"), "X");
  cfg.U = set_of(need(root, "U", "config"), "U");
  cfg.W = set_of(need(root, "W", "config"), "W");
  cfg.P_vertices = points_of(need(root, "P_vertices", "config"), "P_vertices");

  const json& t = need(root, "template", "config");
  check_keys(t, {"kind", "n_c", "C", "sigma"}, "template");
  cfg.tmpl.kind = text(need(t, "kind", "template"), "template.kind");
  if (cfg.tmpl.kind == "circular") {
    if (t.contains("C")) bad("template", "a circular template takes n_c, not C");
    cfg.tmpl.n_c = static_cast<int>(positive(need(t, "n_c", "template"), "template.n_c"));
  } else if (cfg.tmpl.kind == "explicit") {
    if (t.contains("n_c")) bad("template", "an explicit template takes C, not n_c");
    cfg.tmpl.C = matrix_of(need(t, "C", "template"), "template.C");
    cfg.tmpl.n_c = static_cast<int>(cfg.tmpl.C.rows());
  } else {
    bad("template.kind", "expected \"circular\" or \"explicit\"");
  }
  if (t.contains("sigma")) cfg.tmpl.sigma = vector_of(t["sigma"], "template.sigma");

  if (root.contains("D")) {
    const json& d = root["D"];
    if (d.is_string()) {
      if (d.get<std::string>() != "C") bad("D", "expected \"C\" or a matrix");
    } else {
      cfg.D = matrix_of(d, "D");
    }
  }

  if (root.contains("scheduling")) {
    const json& s = root["scheduling"];
    check_keys(s, {"law", "Ts", "mu"}, "scheduling");
    const std::string law = text(need(s, "law", "scheduling"), "scheduling.law");
    if (law == "random") {
      cfg.scheduling.law = SchedulingLaw::Random;
    } else if (law == "van_der_pol") {
      cfg.scheduling.law = SchedulingLaw::VanDerPol;
    } else {
      bad("scheduling.law", "expected \"random\" or \"van_der_pol\"");
    }
    if (s.contains("Ts")) cfg.scheduling.Ts = number(s["Ts"], "scheduling.Ts");
    if (s.contains("mu")) cfg.scheduling.mu = number(s["mu"], "scheduling.mu");
  }

  if (root.contains("solver")) {
    const json& s = root["solver"];
    check_keys(s, {"id", "form", "feas_tol", "opt_tol", "iteration_limit"}, "solver");
    if (s.contains("id")) cfg.solver.id = text(s["id"], "solver.id");
    if (s.contains("form")) cfg.solver.form = form_of(s["form"], "solver.form");
    if (s.contains("feas_tol")) cfg.solver.feas_tol = number(s["feas_tol"], "solver.feas_tol");
    if (s.contains("opt_tol")) cfg.solver.opt_tol = number(s["opt_tol"], "solver.opt_tol");
    if (s.contains("iteration_limit")) cfg.solver.iteration_limit = integer(s["iteration_limit"], "solver.iteration_limit");
  }

  if (root.contains("reduce")) cfg.reduce = boolean(root["reduce"], "reduce");

  if (root.contains("data")) {
    const json& d = root["data"];
    check_keys(d, {"T", "input_range", "seed", "disturbance"}, "data");
    if (d.contains("T")) cfg.data.T = static_cast<int>(positive(d["T"], "data.T"));
    if (d.contains("input_range")) {
      const Vector r = vector_of(d["input_range"], "data.input_range");
      if (r.size() != 2 || !(r(0) < r(1))) bad("data.input_range", "expected [lo, hi] with lo < hi");
      cfg.data.input_lo = r(0);
      cfg.data.input_hi = r(1);
    }
    if (d.contains("seed")) cfg.data.seed = seed_value(d["seed"], "data.seed");
    if (d.contains("disturbance")) cfg.data.disturbance = disturbance_of(d["disturbance"], "data.disturbance");
  }

  if (root.contains("simulation")) {
    const json& s = root["simulation"];
    check_keys(s, {"runs", "steps", "seed", "disturbance", "controller"}, "simulation");
    if (s.contains("runs")) cfg.simulation.runs = static_cast<int>(positive(s["runs"], "simulation.runs"));
    if (s.contains("steps")) cfg.simulation.steps = static_cast<int>(positive(s["steps"], "simulation.steps"));
    if (s.contains("seed")) cfg.simulation.seed = seed_value(s["seed"], "simulation.seed");
    if (s.contains("disturbance"))
      cfg.simulation.disturbance = disturbance_of(s["disturbance"], "simulation.disturbance");
    if (s.contains("controller")) cfg.simulation.controller = controller_of(s["controller"], "simulation.controller");
  }

  const Eigen::Index n = cfg.X.dim();
  if (cfg.W.dim() != n) throw Error(ErrorCode::ShapeMismatch, "W and X dimensions differ");
  if (cfg.tmpl.kind == "explicit" && cfg.tmpl.C.cols() != n)
    throw Error(ErrorCode::ShapeMismatch, "template.C and X dimensions differ");
  if (cfg.tmpl.kind == "circular" && n != 2) bad("template", "circular templates are planar; X must be 2-D");
  if (cfg.tmpl.sigma.size() && cfg.tmpl.sigma.size() != cfg.tmpl.n_c)
    throw Error(ErrorCode::ShapeMismatch, "template.sigma length differs from the facet count");
  if (cfg.D && cfg.D->cols() != n) throw Error(ErrorCode::ShapeMismatch, "D and X dimensions differ");
  if (cfg.plant) {
    if (cfg.plant->n() != n || cfg.plant->m() != cfg.U.dim())
      throw Error(ErrorCode::ShapeMismatch, "plant dimensions disagree with X or U");
    if (cfg.P_vertices.front().size() != cfg.plant->s())
      throw Error(ErrorCode::ShapeMismatch, "plant has a different number of local models than the scheduling dimension");
  }
  return cfg;
}

ProblemConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string config_to_json(const ProblemConfig& cfg) {
  ojson root;
  root["schema"] = kSchemaVersion;
  if (!cfg.name.empty()) root["name"] = cfg.name;
  if (cfg.plant) {
    ojson A = ojson::array(), B = ojson::array();
    for (const Matrix& a : cfg.plant->A) A.push_back(matrix_json(a));
    for (const Matrix& b : cfg.plant->B) B.push_back(matrix_json(b));
    root["plant"] = {{"A", A}, {"B", B}};
  }
  root["X"] = set_json(cfg.X);
  root["U"] = set_json(cfg.U);
  root["W"] = set_json(cfg.W);
  root["P_vertices"] = points_json(cfg.P_vertices);
  ojson t;
  t["kind"] = cfg.tmpl.kind;
  if (cfg.tmpl.kind == "circular") {
    t["n_c"] = cfg.tmpl.n_c;
  } else {
    t["C"] = matrix_json(cfg.tmpl.C);
  }
  if (cfg.tmpl.sigma.size()) t["sigma"] = vector_json(cfg.tmpl.sigma);
  root["template"] = t;
  if (cfg.D) {
    root["D"] = matrix_json(*cfg.D);
  } else {
    root["D"] = "C";
  }
  ojson sch;
  sch["law"] = cfg.scheduling.law == SchedulingLaw::Random ? "random" : "van_der_pol";
  if (cfg.scheduling.law == SchedulingLaw::VanDerPol) {
    sch["Ts"] = cfg.scheduling.Ts;
    sch["mu"] = cfg.scheduling.mu;
  }
  root["scheduling"] = sch;
  ojson solver;
  if (!cfg.solver.id.empty()) solver["id"] = cfg.solver.id;
  solver["form"] = std::string(to_string(cfg.solver.form));
  solver["feas_tol"] = cfg.solver.feas_tol;
  solver["opt_tol"] = cfg.solver.opt_tol;
  solver["iteration_limit"] = cfg.solver.iteration_limit;
  root["solver"] = solver;
  root["reduce"] = cfg.reduce;
  ojson data;
  data["T"] = cfg.data.T;
  data["input_range"] = {cfg.data.input_lo, cfg.data.input_hi};
  data["seed"] = cfg.data.seed;
  data["disturbance"] = std::string(disturbance_name(cfg.data.disturbance));
  root["data"] = data;
  ojson sim;
  sim["runs"] = cfg.simulation.runs;
  sim["steps"] = cfg.simulation.steps;
  sim["seed"] = cfg.simulation.seed;
  sim["disturbance"] = std::string(disturbance_name(cfg.simulation.disturbance));
  sim["controller"] = std::string(to_string(cfg.simulation.controller));
  root["simulation"] = sim;
  return pretty(root);
}

ProblemConfig example_config(std::string_view plant) {
  const ExampleSetup ex = build_example_plant(plant);
  ProblemConfig cfg;
  cfg.name = ex.name;
  cfg.plant = ex.plant;
  cfg.X = ex.X;
  cfg.U = ex.U;
  cfg.W = ex.W;
  cfg.P_vertices = ex.P_vertices;
  cfg.tmpl.n_c = ex.n_c;
  cfg.scheduling = ex.scheduling;
  cfg.simulation.runs = ex.name == "van_der_pol" ? 30 : 50;
  return cfg;
}

CCTemplate build_template(const ProblemConfig& cfg) {
  const Matrix C = cfg.tmpl.kind == "circular" ? build_circular_template(cfg.tmpl.n_c) : cfg.tmpl.C;
  const Vector sigma = cfg.tmpl.sigma.size() ? cfg.tmpl.sigma : Vector::Ones(C.rows());
  return build_cc_machinery(C, sigma);
}

SynthesisProblem build_problem(const ProblemConfig& cfg) {
  SynthesisProblem prob = make_problem(build_template(cfg), cfg.X, cfg.U, cfg.W, cfg.P_vertices);
  if (cfg.D) prob.D = *cfg.D;
  return prob;
}

SynthesisOptions synthesis_options(const ProblemConfig& cfg) {
  SynthesisOptions opts;
  opts.form = cfg.solver.form;
  opts.solver_id = cfg.solver.id;
  opts.lp.feas_tol = cfg.solver.feas_tol;
  opts.lp.opt_tol = cfg.solver.opt_tol;
  opts.lp.iteration_limit = cfg.solver.iteration_limit;
  return opts;
}

DataGenSpec data_spec(const ProblemConfig& cfg) {
  DataGenSpec spec;
  spec.T = cfg.data.T;
  spec.input_lo = cfg.data.input_lo;
  spec.input_hi = cfg.data.input_hi;
  spec.seed = cfg.data.seed;
  spec.scheduling = cfg.scheduling;
  spec.disturbance = cfg.data.disturbance;
  return spec;
}

SimulationSpec simulation_spec(const ProblemConfig& cfg, const RCISolution& sol, int run) {
  SimulationSpec spec;
  spec.steps = cfg.simulation.steps;
  spec.seed = cfg.simulation.seed + static_cast<std::uint64_t>(run);
  spec.scheduling = cfg.scheduling;
  spec.disturbance = cfg.simulation.disturbance;
  spec.mode = cfg.simulation.controller;
  if (!sol.vertex_states.empty()) spec.x0 = sol.vertex_states[static_cast<std::size_t>(run) % sol.vertex_states.size()];
  return spec;
}

FeasibleModelSet model_set_from_data(const ProblemConfig& cfg, const TrajectoryData& traj) {
  traj.validate();
  if (traj.state_dim() != cfg.X.dim() || traj.input_dim() != cfg.U.dim())
    throw Error(ErrorCode::ShapeMismatch, "data dimensions disagree with X or U");
  validate_schedules(traj, cfg.P_vertices);
  FeasibleModelSet F = build_feasible_model_set(build_data_matrices(traj), cfg.W);
  return cfg.reduce ? reduce_model_set(F) : F;
}

std::string solution_to_json(const SolutionDocument& doc, const WriteOptions& opts) {
  const RCISolution& s = doc.solution;
  ojson root;
  root["schema"] = kSchemaVersion;
  root["mode"] = doc.mode;
  root["plant"] = doc.plant;
  root["T"] = doc.T;
  root["n_c"] = s.q.size();
  root["objective"] = s.objective;
  root["volume"] = s.volume ? ojson(*s.volume) : ojson(nullptr);
  root["q"] = vector_json(s.q);
  root["vertex_states"] = points_json(s.vertex_states);
  root["vertex_inputs"] = points_json(s.vertex_inputs);
  root["epsilon"] = vector_json(s.epsilon);
  root["d"] = vector_json(s.d);
  const SynthesisDiagnostics& g = s.diagnostics;
  ojson diag;
  diag["mode"] = g.mode;
  diag["form"] = std::string(to_string(g.form));
  diag["solver"] = g.solver;
  diag["lp_rows"] = g.lp_rows;
  diag["lp_cols"] = g.lp_cols;
  diag["lp_nonzeros"] = g.lp_nonzeros;
  diag["iterations"] = g.iterations;
  diag["model_rows"] = g.model_rows;
  root["diagnostics"] = diag;
  if (opts.timings) root["timings"] = {{"assemble_seconds", g.assemble_seconds}, {"solve_seconds", g.solve_seconds}};
  if (opts.multipliers && !s.multipliers.empty()) {
    ojson blocks = ojson::array();
    for (const Matrix& m : s.multipliers) blocks.push_back(matrix_json(m));
    ojson rows = ojson::array();
    for (int r : s.multiplier_rows) rows.push_back(r);
    root["multipliers"] = {{"rows", rows}, {"blocks", blocks}};
  }
  return pretty(root);
}

SolutionDocument solution_from_json(std::string_view json_text) {
  const json root = parse_json(json_text, "solution");
  check_keys(root, {"schema", "mode", "plant", "T", "n_c", "objective", "volume", "q", "vertex_states",
                    "vertex_inputs", "epsilon", "d", "diagnostics", "timings", "multipliers"},
             "solution");
  check_schema(root, "solution");
  SolutionDocument doc;
  RCISolution& s = doc.solution;
  doc.mode = text(need(root, "mode", "solution"), "solution.mode");
  if (doc.mode != "data" && doc.mode != "model") bad("solution.mode", "expected \"data\" or \"model\"");
  if (root.contains("plant")) doc.plant = text(root["plant"], "solution.plant");
  if (root.contains("T")) doc.T = static_cast<int>(integer(root["T"], "solution.T"));
  s.objective = number(need(root, "objective", "solution"), "solution.objective");
  if (root.contains("volume") && !root["volume"].is_null()) s.volume = number(root["volume"], "solution.volume");
  s.q = vector_of(need(root, "q", "solution"), "solution.q");
  if (root.contains("n_c") && integer(root["n_c"], "solution.n_c") != s.q.size())
    throw Error(ErrorCode::ShapeMismatch, "solution: n_c differs from the length of q");
  s.vertex_states = points_of(need(root, "vertex_states", "solution"), "solution.vertex_states");
  s.vertex_inputs = points_of(need(root, "vertex_inputs", "solution"), "solution.vertex_inputs");
  if (s.vertex_states.size() != s.vertex_inputs.size())
    throw Error(ErrorCode::LengthMismatch, "solution: vertex_states and vertex_inputs differ in length");
  if (root.contains("epsilon")) s.epsilon = vector_of(root["epsilon"], "solution.epsilon");
  if (root.contains("d")) s.d = vector_of(root["d"], "solution.d");
  if (root.contains("diagnostics")) {
    const json& g = root["diagnostics"];
    check_keys(g, {"mode", "form", "solver", "lp_rows", "lp_cols", "lp_nonzeros", "iterations", "model_rows"},
               "solution.diagnostics");
    SynthesisDiagnostics& d = s.diagnostics;
    if (g.contains("mode")) d.mode = text(g["mode"], "diagnostics.mode");
    if (g.contains("form")) d.form = form_of(g["form"], "diagnostics.form");
    if (g.contains("solver")) d.solver = text(g["solver"], "diagnostics.solver");
    if (g.contains("lp_rows")) d.lp_rows = static_cast<int>(integer(g["lp_rows"], "diagnostics.lp_rows"));
    if (g.contains("lp_cols")) d.lp_cols = static_cast<int>(integer(g["lp_cols"], "diagnostics.lp_cols"));
    if (g.contains("lp_nonzeros"))
      d.lp_nonzeros = static_cast<std::size_t>(integer(g["lp_nonzeros"], "diagnostics.lp_nonzeros"));
    if (g.contains("iterations")) d.iterations = integer(g["iterations"], "diagnostics.iterations");
    if (g.contains("model_rows")) d.model_rows = static_cast<int>(integer(g["model_rows"], "diagnostics.model_rows"));
  }
  if (root.contains("timings")) {
    const json& t = root["timings"];
    check_keys(t, {"assemble_seconds", "solve_seconds"}, "solution.timings");
    if (t.contains("assemble_seconds"))
      s.diagnostics.assemble_seconds = number(t["assemble_seconds"], "timings.assemble_seconds");
    if (t.contains("solve_seconds")) s.diagnostics.solve_seconds = number(t["solve_seconds"], "timings.solve_seconds");
  }
  if (root.contains("multipliers")) {
    const json& m = root["multipliers"];
    check_keys(m, {"rows", "blocks"}, "solution.multipliers");
    const json& rows = need(m, "rows", "solution.multipliers");
    if (!rows.is_array()) bad("solution.multipliers.rows", "expected an array");
    for (const json& r : rows) s.multiplier_rows.push_back(static_cast<int>(integer(r, "multipliers.rows")));
    const json& blocks = need(m, "blocks", "solution.multipliers");
    if (!blocks.is_array()) bad("solution.multipliers.blocks", "expected an array");
    for (const json& b : blocks) s.multipliers.push_back(matrix_of(b, "multipliers.blocks"));
  }
  return doc;
}

SolutionDocument load_solution(const std::string& path) { return solution_from_json(read_text_file(path)); }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text_out) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
  out.write(text_out.data(), static_cast<std::streamsize>(text_out.size()));
  if (!out) throw Error(ErrorCode::InvalidConfig, "write to '" + path + "' failed");
}

VertexSet polygon_outline(const Polytope& P) {
  if (P.dim() != 2) throw Error(ErrorCode::ShapeMismatch, "polygon outlines need a 2-D polytope");
  VertexSet v = P.cached_vertices() ? *P.cached_vertices() : enumerate_vertices(P);
  if (v.empty()) return v;
  Vector c = Vector::Zero(2);
  for (const Vector& p : v) c += p;
  c /= static_cast<double>(v.size());
  std::sort(v.begin(), v.end(), [&](const Vector& a, const Vector& b) {
    return std::atan2(a(1) - c(1), a(0) - c(0)) < std::atan2(b(1) - c(1), b(0) - c(0));
  });
  return v;
}

std::string render_svg(const Polytope& X, const std::vector<SvgShape>& shapes, int pixels) {
  const VertexSet xv = polygon_outline(X);
  if (xv.empty()) throw Error(ErrorCode::Empty, "X has no vertices");
  Vector lo = xv.front(), hi = xv.front();
  for (const Vector& p : xv) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vector margin = 0.05 * (hi - lo);
  lo -= margin;
  hi += margin;
  const double w = hi(0) - lo(0), h = hi(1) - lo(1);
  const int px_h = std::max(1, static_cast<int>(std::lround(pixels * h / w)));

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pixels << "\" height=\"" << px_h
     << "\" viewBox=\"" << num(lo(0)) << ' ' << num(-hi(1)) << ' ' << num(w) << ' ' << num(h) << "\">\n";
  os << "<rect x=\"" << num(lo(0)) << "\" y=\"" << num(-hi(1)) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" fill=\"#ffffff\"/>\n";
  for (const SvgShape& s : shapes) {
    if (s.points.empty()) continue;
    os << '<' << (s.closed ? "polygon" : "polyline");
    if (!s.id.empty()) os << " id=\"" << s.id << '"';
    os << " points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (i) os << ' ';
      os << num(s.points[i](0)) << ',' << num(-s.points[i](1));
    }
    os << "\" fill=\"" << (s.closed ? s.fill : "none") << "\" stroke=\"" << s.stroke << "\" stroke-width=\""
       << num(s.stroke_width) << '"';
    if (s.opacity < 1.0) os << " opacity=\"" << num(s.opacity) << '"';
    if (s.dashed) os << " stroke-dasharray=\"6 4\"";
    os << " vector-effect=\"non-scaling-stroke\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ccrci::io
