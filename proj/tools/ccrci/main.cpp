#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ccrci/dataset.hpp"
#include "ccrci/error.hpp"
#include "ccrci/io.hpp"
#include "ccrci/lp.hpp"
#include "ccrci/runtime.hpp"
#include "ccrci/synthesis.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace ccrci;

namespace {

enum Exit : int {
  kOk = 0,
  kInfeasible = 2,
  kVerificationFailed = 3,
  kInputError = 4,
  kNumerical = 5,
};

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SynthesisInfeasible:
      return kInfeasible;
    case ErrorCode::NumericalBreakdown:
    case ErrorCode::BudgetExceeded:
      return kNumerical;
    default:
      return kInputError;
  }
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

io::ProblemConfig resolve_config(const std::string& path, const std::string& plant) {
  if (!path.empty()) return io::load_config(path);
  if (!plant.empty()) return io::example_config(plant);
  throw Error(ErrorCode::InvalidConfig, "either --config or --plant is required");
}

const PlantModel& require_plant(const io::ProblemConfig& cfg) {
  if (!cfg.plant) throw Error(ErrorCode::InvalidConfig, "the config has no plant model");
  return *cfg.plant;
}

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
  std::string config, plant, out;
  std::optional<int> T;
  std::optional<std::uint64_t> seed;
};

int cmd_gen_data(const GenDataArgs& a) {
  io::ProblemConfig cfg = resolve_config(a.config, a.plant);
  if (a.T) cfg.data.T = *a.T;
  if (a.seed) cfg.data.seed = *a.seed;
  const GeneratedData gen = generate_experiment_data(require_plant(cfg), cfg.W, cfg.P_vertices, io::data_spec(cfg));
  save_trajectory(gen.trajectory, a.out);

  const ExcitationReport rep =
      excitation_report(build_data_matrices(gen.trajectory), symmetric_form(cfg.W).H);
  std::cout << "wrote " << a.out << " (T = " << gen.trajectory.horizon() << ", seed " << cfg.data.seed << ")\n";
  if (gen.clipped_schedules > 0) std::cout << "clipped schedules: " << gen.clipped_schedules << "\n";
  std::cout << "excitation: rank " << rep.data_rank << "/" << rep.required_rank;
  if (rep.ok()) {
    std::cout << " OK\n";
    return kOk;
  }
  std::cout << " FAIL\n";
  if (rep.data_rank < rep.required_rank) {
    std::cerr << "the data matrix [p (x) x; p (x) u] has rank " << rep.data_rank << " but " << rep.required_rank
              << " is needed for a bounded model set; collect more samples or richer inputs\n";
  }
  if (rep.noise_rank < rep.state_dim) {
    std::cerr << "the disturbance description has rank " << rep.noise_rank << " < n = " << rep.state_dim << "\n";
  }
  return kInputError;
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
  std::string config, data, mode = "data", out, mps, form;
  std::optional<int> T;
  bool timings = false, multipliers = false, no_reduce = false, verbose = false;
};

int cmd_synth(const SynthArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  io::ProblemConfig cfg = io::load_config(a.config);
  if (a.no_reduce) cfg.reduce = false;
  SynthesisOptions opts = io::synthesis_options(cfg);
  if (!a.form.empty()) {
    opts.form = a.form == "full" ? InvarianceForm::Full
                : a.form == "separable" ? InvarianceForm::Separable
                                        : InvarianceForm::Auto;
  }
  opts.lp.verbose = a.verbose;
  opts.keep_multipliers = a.multipliers;

  SynthesisProblem prob = io::build_problem(cfg);
  io::SolutionDocument doc;
  doc.mode = a.mode;
  doc.plant = cfg.name;

  std::optional<AssembledSynthesis> assembled;
  std::optional<Matrix> M_true;
  if (a.mode == "data") {
    if (a.data.empty()) throw Error(ErrorCode::InvalidConfig, "--data is required in data mode");
    TrajectoryData traj = load_trajectory(a.data);
    if (a.T) traj = traj.prefix(*a.T);
    doc.T = traj.horizon();
    prob.model_set = io::model_set_from_data(cfg, traj);
    std::cout << "model set: " << prob.model_set->active_rows().size() << " of " << prob.model_set->H_bar.rows()
              << " rows kept\n";
    if (!a.mps.empty()) assembled = assemble_synthesis(prob, opts.form);
  } else {
    M_true = require_plant(cfg).M();
    if (!a.mps.empty()) assembled = assemble_model_synthesis(prob, *M_true);
  }
  if (assembled) {
    io::write_text_file(a.mps, lp::to_mps(assembled->prog));
    std::cout << "wrote " << a.mps << "\n";
  }

  const SynthesisResult res = M_true ? synthesize_model_based(prob, *M_true, opts) : synthesize(prob, opts);
  if (!res.optimal()) {
    std::cerr << "synthesis infeasible: " << res.infeasibility.summary() << "\n";
    return kInfeasible;
  }
  doc.solution = res.solution;
  io::write_text_file(a.out, io::solution_to_json(doc, {a.timings, a.multipliers}));

  const RCISolution& s = doc.solution;
  std::cout << "objective d_X = " << fmt("%.4f", s.objective) << "\n";
  if (s.volume) std::cout << "volume = " << fmt("%.4f", *s.volume) << "\n";
  std::cout << "LP " << s.diagnostics.lp_rows << " x " << s.diagnostics.lp_cols << ", " << s.diagnostics.iterations
            << " iterations\n";
  std::cout << "wall time " << fmt("%.2f", seconds_since(t0)) << " s\n";
  std::cout << "wrote " << a.out << "\n";
  return kOk;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
  std::string solution, config, data;
  bool model = false;
  double tol = 1e-6;
};

int cmd_verify(const VerifyArgs& a) {
  const io::ProblemConfig cfg = io::load_config(a.config);
  io::SolutionDocument doc = io::load_solution(a.solution);
  SynthesisProblem prob = io::build_problem(cfg);
  RCISolution& sol = doc.solution;
  if (sol.q.size() != prob.tmpl.num_facets())
    throw Error(ErrorCode::ShapeMismatch, "solution has " + std::to_string(sol.q.size()) + " offsets, template has " +
                                              std::to_string(prob.tmpl.num_facets()) + " facets");
  if (sol.vertex_inputs.size() != static_cast<std::size_t>(prob.tmpl.num_vertices()))
    throw Error(ErrorCode::ShapeMismatch, "solution vertex count differs from the template");

  // The vertices are a function of q; recompute them so an edited q is checked as such.
  double moved = 0.0;
  for (std::size_t i = 0; i < sol.vertex_states.size(); ++i) {
    const Vector v = prob.tmpl.V_maps[i] * sol.q;
    moved = std::max(moved, (v - sol.vertex_states[i]).cwiseAbs().maxCoeff());
    sol.vertex_states[i] = v;
  }
  if (moved > 1e-9) std::cout << "note: stored vertices differ from V q by " << fmt("%.3g", moved) << "\n";

  std::optional<Matrix> singleton;
  if (a.model || doc.mode == "model") {
    singleton = require_plant(cfg).M();
  } else {
    if (a.data.empty()) throw Error(ErrorCode::InvalidConfig, "--data is required for a data-driven solution");
    const TrajectoryData traj = load_trajectory(a.data);
    const TrajectoryData used = doc.T > 0 && doc.T < traj.horizon() ? traj.prefix(doc.T) : traj;
    validate_schedules(used, cfg.P_vertices);
    prob.model_set = build_feasible_model_set(build_data_matrices(used), cfg.W);
  }
  if (!prob.model_set) sol.multipliers.clear();

  const InvarianceReport inv = verify_invariance(sol, prob, singleton);
  const CertificateReport cert = check_certificate(sol, prob);
  if (singleton) {
    std::cout << "invariance against the singleton model";
  } else {
    std::cout << "invariance: " << inv.lp_count << " LPs over the full model set";
  }
  std::cout << ", min slack " << fmt("%.3e", inv.min_slack) << "\n";
  std::cout << "certificate: config " << fmt("%.2e", cert.config) << ", state " << fmt("%.2e", cert.state)
            << ", input " << fmt("%.2e", cert.input);
  if (!sol.multipliers.empty()) {
    std::cout << ", multipliers " << fmt("%.2e", std::max(cert.multiplier, cert.multiplier_equality)) << ", bound "
              << fmt("%.2e", cert.multiplier_bound);
  }
  std::cout << "\n";

  bool ok = true;
  if (!inv.passed(a.tol)) {
    ok = false;
    std::cout << "FAIL facet " << inv.worst_facet << " (vertex " << inv.worst_vertex << ", schedule vertex "
              << inv.worst_schedule << "): slack " << fmt("%.3e", inv.min_slack) << "\n";
  }
  if (!cert.passed(std::max(a.tol, 1e-7))) {
    ok = false;
    std::cout << "FAIL certificate re-check\n";
  }
  if (ok) std::cout << "PASS\n";
  return ok ? kOk : kVerificationFailed;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string solution, config, out_dir;
  std::optional<int> runs, steps;
  std::optional<std::uint64_t> seed;
  std::string disturbance, controller;
  bool no_disturbance = false;
};

int cmd_simulate(const SimulateArgs& a) {
  io::ProblemConfig cfg = io::load_config(a.config);
  if (a.runs) cfg.simulation.runs = *a.runs;
  if (a.steps) cfg.simulation.steps = *a.steps;
  if (a.seed) cfg.simulation.seed = *a.seed;
  if (!a.disturbance.empty())
    cfg.simulation.disturbance = a.disturbance == "vertex" ? DisturbanceMode::Vertex : DisturbanceMode::Uniform;
  if (!a.controller.empty())
    cfg.simulation.controller = a.controller == "min_sum" ? ControllerMode::MinSum : ControllerMode::Convex;
  if (a.no_disturbance) cfg.W = Polytope::symmetric_box(Vector::Zero(cfg.X.dim()));

  const io::SolutionDocument doc = io::load_solution(a.solution);
  const SynthesisProblem prob = io::build_problem(cfg);
  const PlantModel& plant = require_plant(cfg);
  fs::create_directories(a.out_dir);

  nlohmann::ordered_json summary;
  summary["solution"] = fs::path(a.solution).filename().string();
  summary["runs"] = cfg.simulation.runs;
  summary["steps"] = cfg.simulation.steps;
  summary["seed"] = cfg.simulation.seed;
  summary["controller"] = std::string(to_string(cfg.simulation.controller));
  nlohmann::ordered_json per_run = nlohmann::ordered_json::array();
  int total = 0, clipped = 0;
  for (int r = 0; r < cfg.simulation.runs; ++r) {
    const SimulationSpec spec = io::simulation_spec(cfg, doc.solution, r);
    const ClosedLoopTrace trace = simulate_closed_loop(plant, doc.solution, prob, spec);
    char name[32];
    std::snprintf(name, sizeof name, "trace_%03d.csv", r);
    io::write_text_file((fs::path(a.out_dir) / name).string(), trace_to_csv(trace));
    total += trace.violations();
    clipped += trace.clipped_schedules;
    nlohmann::ordered_json run;
    run["run"] = r;
    run["start_vertex"] = r % static_cast<int>(doc.solution.vertex_states.size());
    run["seed"] = spec.seed;
    run["steps"] = static_cast<int>(trace.inputs.size());
    run["state_violations"] = trace.state_violations();
    run["input_violations"] = trace.input_violations();
    run["controller_failure"] = trace.failure;
    run["clipped_schedules"] = trace.clipped_schedules;
    per_run.push_back(run);
  }
  summary["violations"] = total;
  summary["clipped_schedules"] = clipped;
  summary["per_run"] = per_run;
  io::write_text_file((fs::path(a.out_dir) / "summary.json").string(), summary.dump(2) + "\n");

  std::cout << cfg.simulation.runs << " runs x " << cfg.simulation.steps << " steps: " << total << " violations";
  if (clipped) std::cout << " (" << clipped << " clipped schedules)";
  std::cout << "\nwrote " << a.out_dir << "\n";
  return total == 0 ? kOk : kVerificationFailed;
}

// ------------------------------------------------------------------ report

VertexSet trace_states(const std::string& path) {
  std::istringstream in(io::read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path + ": empty trace");
  std::vector<int> xcols;
  {
    std::istringstream hs(line);
    std::string cell;
    for (int c = 0; std::getline(hs, cell, ','); ++c) {
      if (cell.size() > 1 && cell[0] == 'x') xcols.push_back(c);
    }
  }
  if (xcols.size() != 2) throw Error(ErrorCode::ShapeMismatch, path + ": trace overlays need 2-D states");
  VertexSet states;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    Vector x(2);
    for (int k = 0; k < 2; ++k) {
      if (static_cast<std::size_t>(xcols[k]) >= cells.size()) throw Error(ErrorCode::ParseError, path + ": short row");
      x(k) = std::stod(cells[xcols[k]]);
    }
    states.push_back(x);
  }
  return states;
}

VertexSet ordered(VertexSet pts) {
  pts = dedup_points(pts, 1e-9);
  if (pts.size() < 3) return pts;
  Vector c = Vector::Zero(2);
  for (const Vector& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Vector& a, const Vector& b) {
    return std::atan2(a(1) - c(1), a(0) - c(0)) < std::atan2(b(1) - c(1), b(0) - c(0));
  });
  return pts;
}

struct ReportArgs {
  std::vector<std::string> solutions, traces;
  std::string config, out_dir;
};

int cmd_report(const ReportArgs& a) {
  struct Entry {
    std::string file;
    io::SolutionDocument doc;
  };
  std::vector<Entry> entries;
  for (const std::string& f : a.solutions) entries.push_back({f, io::load_solution(f)});
  // Data-driven solutions in increasing T, then the model-based ones.
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    const bool xm = x.doc.mode == "model", ym = y.doc.mode == "model";
    if (xm != ym) return !xm;
    return x.doc.T < y.doc.T;
  });

  std::string plant = entries.front().doc.plant;
  const io::ProblemConfig cfg = !a.config.empty() ? io::load_config(a.config) : io::example_config(plant);
  fs::create_directories(a.out_dir);

  auto volume_of = [](const RCISolution& s) {
    return s.volume ? *s.volume : volume_2d(s.vertex_states);
  };

  std::string rows = "file,plant,mode,T,n_c,volume,d_X\n";
  std::string head = "quantity", vol = "volume", obj = "d_X";
  for (const Entry& e : entries) {
    const RCISolution& s = e.doc.solution;
    const std::string label = e.doc.mode == "model" ? "model" : "T=" + std::to_string(e.doc.T);
    rows += fs::path(e.file).filename().string() + "," + e.doc.plant + "," + e.doc.mode + "," +
            std::to_string(e.doc.T) + "," + std::to_string(s.q.size()) + "," + fmt("%.6f", volume_of(s)) + "," +
            fmt("%.6f", s.objective) + "\n";
    head += "," + label;
    vol += "," + fmt("%.4f", volume_of(s));
    obj += "," + fmt("%.4f", s.objective);
  }
  io::write_text_file((fs::path(a.out_dir) / "solutions.csv").string(), rows);
  io::write_text_file((fs::path(a.out_dir) / "table.csv").string(), head + "\n" + vol + "\n" + obj + "\n");

  static const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};
  std::vector<io::SvgShape> overlay;
  overlay.push_back({io::polygon_outline(cfg.X), true, "#444444", "#f2f2f2", 1.5, 1.0, false, "X"});
  std::size_t colour = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const io::SolutionDocument& d = entries[i].doc;
    io::SvgShape s;
    s.points = ordered(d.solution.vertex_states);
    s.id = d.mode == "model" ? "S_model" : "S_T" + std::to_string(d.T);
    if (d.mode == "model") {
      s.stroke = "#000000";
      s.dashed = true;
      s.stroke_width = 1.5;
    } else {
      s.stroke = palette[colour++ % 6];
      s.stroke_width = 1.5;
    }
    overlay.push_back(s);

    std::vector<io::SvgShape> single = {overlay.front(), s};
    single.back().fill = d.mode == "model" ? "none" : "#cfe3f3";
    io::write_text_file((fs::path(a.out_dir) / (fs::path(entries[i].file).stem().string() + ".svg")).string(),
                        io::render_svg(cfg.X, single));
  }
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    io::SvgShape t;
    t.points = trace_states(a.traces[i]);
    t.closed = false;
    t.stroke = "#c0392b";
    t.stroke_width = 0.6;
    t.opacity = 0.7;
    t.id = "trace_" + std::to_string(i);
    overlay.push_back(t);
  }
  io::write_text_file((fs::path(a.out_dir) / "overlay.svg").string(), io::render_svg(cfg.X, overlay));

  std::cout << head << "\n" << vol << "\n" << obj << "\n";
  std::cout << "wrote " << a.out_dir << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven configuration-constrained RCI synthesis for LPV systems"};
  app.require_subcommand(1);

  auto* example = app.add_subcommand("example-config", "Write the configuration of a built-in example plant");
  std::string example_plant, example_out;
  example->add_option("--plant", example_plant, "double_integrator or van_der_pol")->required();
  example->add_option("--out", example_out, "Output path (stdout when omitted)");

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Simulate an open-loop experiment and write the trajectory CSV");
  gen_cmd->add_option("--config", gen.config, "Problem config JSON");
  gen_cmd->add_option("--plant", gen.plant, "Built-in plant used when no config is given");
  gen_cmd->add_option("--T", gen.T, "Number of samples")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen.out, "Output CSV")->required();

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "Solve the synthesis LP and write the solution JSON");
  syn_cmd->add_option("--config", syn.config, "Problem config JSON")->required();
  syn_cmd->add_option("--data", syn.data, "Trajectory CSV (data mode)");
  syn_cmd->add_option("--mode", syn.mode, "data or model")->check(CLI::IsMember({"data", "model"}));
  syn_cmd->add_option("--T", syn.T, "Use only the first T samples")->check(CLI::PositiveNumber);
  syn_cmd->add_option("--out", syn.out, "Output solution JSON")->required();
  syn_cmd->add_option("--mps", syn.mps, "Also write the LP in MPS format");
  syn_cmd->add_option("--form", syn.form, "Invariance form")->check(CLI::IsMember({"auto", "full", "separable"}));
  syn_cmd->add_flag("--timings", syn.timings, "Include timings in the JSON output");
  syn_cmd->add_flag("--multipliers", syn.multipliers, "Include the invariance multipliers in the JSON output");
  syn_cmd->add_flag("--no-reduce", syn.no_reduce, "Skip redundancy reduction of the model set");
  syn_cmd->add_flag("--verbose", syn.verbose, "Print LP solver progress");

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify", "Check invariance and the certificate of a solution");
  ver_cmd->add_option("--solution", ver.solution, "Solution JSON")->required();
  ver_cmd->add_option("--config", ver.config, "Problem config JSON")->required();
  ver_cmd->add_option("--data", ver.data, "Trajectory CSV the solution was built from");
  ver_cmd->add_flag("--model", ver.model, "Verify against the config plant as a singleton model set");
  ver_cmd->add_option("--tol", ver.tol, "Slack tolerance")->check(CLI::NonNegativeNumber);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the vertex controller in closed loop");
  sim_cmd->add_option("--solution", sim.solution, "Solution JSON")->required();
  sim_cmd->add_option("--config", sim.config, "Problem config JSON")->required();
  sim_cmd->add_option("--runs", sim.runs, "Number of runs")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--steps", sim.steps, "Steps per run")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Base seed");
  sim_cmd->add_option("--disturbance", sim.disturbance, "uniform or vertex")
      ->check(CLI::IsMember({"uniform", "vertex"}));
  sim_cmd->add_option("--controller", sim.controller, "convex or min_sum")->check(CLI::IsMember({"convex", "min_sum"}));
  sim_cmd->add_flag("--no-disturbance", sim.no_disturbance, "Simulate with w = 0");
  sim_cmd->add_option("--out-dir", sim.out_dir, "Directory for traces and summary.json")->required();

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Tabulate solutions and draw SVG overlays");
  rep_cmd->add_option("solutions", rep.solutions, "Solution JSON files")->required();
  rep_cmd->add_option("--config", rep.config, "Problem config JSON (defaults to the solutions' example plant)");
  rep_cmd->add_option("--traces", rep.traces, "Trace CSVs to overlay");
  rep_cmd->add_option("--out-dir", rep.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*example) {
      const std::string text = io::config_to_json(io::example_config(example_plant));
      if (example_out.empty()) {
        std::cout << text;
      } else {
        io::write_text_file(example_out, text);
      }
      return kOk;
    }
    if (*gen_cmd) return cmd_gen_data(gen);
    if (*syn_cmd) return cmd_synth(syn);
    if (*ver_cmd) return cmd_verify(ver);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*rep_cmd) return cmd_report(rep);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}
