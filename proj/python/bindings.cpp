#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ccrci/cc_template.hpp"
#include "ccrci/dataset.hpp"
#include "ccrci/error.hpp"
#include "ccrci/io.hpp"
#include "ccrci/linops.hpp"
#include "ccrci/polytope.hpp"
#include "ccrci/runtime.hpp"
#include "ccrci/synthesis.hpp"

namespace py = pybind11;
using namespace ccrci;

namespace {

py::dict diagnostics_dict(const SynthesisDiagnostics& d) {
  py::dict out;
  out["mode"] = d.mode;
  out["form"] = std::string(to_string(d.form));
  out["solver"] = d.solver;
  out["lp_rows"] = d.lp_rows;
  out["lp_cols"] = d.lp_cols;
  out["lp_nonzeros"] = d.lp_nonzeros;
  out["iterations"] = d.iterations;
  out["model_rows"] = d.model_rows;
  out["assemble_seconds"] = d.assemble_seconds;
  out["solve_seconds"] = d.solve_seconds;
  return out;
}

// Builds the problem for a config, attaching the model set (data mode) or
// the plant model (model mode), and solves it.
SynthesisResult synthesize_config(const io::ProblemConfig& cfg, const std::optional<TrajectoryData>& data,
                                  const std::string& mode) {
  SynthesisProblem prob = io::build_problem(cfg);
  const SynthesisOptions opts = io::synthesis_options(cfg);
  if (mode == "model") {
    if (!cfg.plant) throw Error(ErrorCode::InvalidConfig, "model mode needs a plant in the config");
    return synthesize_model_based(prob, cfg.plant->M(), opts);
  }
  if (mode != "data") throw Error(ErrorCode::InvalidConfig, "mode must be 'data' or 'model'");
  if (!data) throw Error(ErrorCode::InvalidConfig, "data mode needs a trajectory");
  prob.model_set = io::model_set_from_data(cfg, *data);
  return synthesize(prob, opts);
}

}  // namespace

PYBIND11_MODULE(_ccrci, m) {
  m.doc() = "Data-driven configuration-constrained RCI synthesis for LPV systems";

  py::register_exception<Error>(m, "CcrciError", PyExc_RuntimeError);

  m.def("kron", &linops::kron, py::arg("a"), py::arg("b"));
  m.def("vec", &linops::vec, py::arg("a"));
  m.def("unvec", &linops::unvec, py::arg("v"), py::arg("rows"), py::arg("cols"));

  py::class_<Polytope>(m, "Polytope")
      .def(py::init<Matrix, Vector>(), py::arg("H"), py::arg("h"))
      .def_static("symmetric_box", &Polytope::symmetric_box, py::arg("bound"))
      .def_static("box", &Polytope::box, py::arg("lower"), py::arg("upper"))
      .def_property_readonly("H", &Polytope::H)
      .def_property_readonly("h", &Polytope::h)
      .def_property_readonly("dim", &Polytope::dim)
      .def("contains", &Polytope::contains, py::arg("x"), py::arg("tol") = 1e-8)
      .def("__repr__", [](const Polytope& p) {
        return "<Polytope dim=" + std::to_string(p.dim()) + " rows=" + std::to_string(p.num_rows()) + ">";
      });
  m.def("enumerate_vertices", [](const Polytope& P) { return enumerate_vertices(P); }, py::arg("P"));
  m.def("support", &support, py::arg("c"), py::arg("P"));
  m.def("volume_2d", &volume_2d, py::arg("vertices"));

  py::class_<CCTemplate>(m, "CCTemplate")
      .def_readonly("C", &CCTemplate::C)
      .def_readonly("sigma", &CCTemplate::sigma)
      .def_readonly("vertex_index_sets", &CCTemplate::vertex_index_sets)
      .def_readonly("V_maps", &CCTemplate::V_maps)
      .def_readonly("E", &CCTemplate::E)
      .def_property_readonly("num_facets", &CCTemplate::num_facets)
      .def_property_readonly("num_vertices", &CCTemplate::num_vertices)
      .def("vertices", &CCTemplate::vertices, py::arg("q"))
      .def("configuration_violation", &CCTemplate::configuration_violation, py::arg("q"));
  m.def("build_circular_template", &build_circular_template, py::arg("n_c"));
  m.def("build_cc_machinery", [](const Matrix& C, const Vector& sigma) { return build_cc_machinery(C, sigma); },
        py::arg("C"), py::arg("sigma"));

  py::class_<TrajectoryData>(m, "TrajectoryData")
      .def(py::init<>())
      .def_readwrite("states", &TrajectoryData::states)
      .def_readwrite("inputs", &TrajectoryData::inputs)
      .def_readwrite("schedules", &TrajectoryData::schedules)
      .def_property_readonly("horizon", &TrajectoryData::horizon)
      .def("prefix", &TrajectoryData::prefix, py::arg("T"))
      .def("validate", &TrajectoryData::validate)
      .def("to_csv", [](const TrajectoryData& t) { return trajectory_to_csv(t); })
      .def_static("from_csv", &trajectory_from_csv, py::arg("text"));
  m.def("load_trajectory", &load_trajectory, py::arg("path"));
  m.def("save_trajectory", &save_trajectory, py::arg("trajectory"), py::arg("path"));

  py::class_<DataMatrices>(m, "DataMatrices")
      .def_readonly("X_plus", &DataMatrices::X_plus)
      .def_readonly("X_pu", &DataMatrices::X_pu);
  m.def("build_data_matrices", &build_data_matrices, py::arg("trajectory"));

  py::class_<ExcitationReport>(m, "ExcitationReport")
      .def_readonly("data_rank", &ExcitationReport::data_rank)
      .def_readonly("required_rank", &ExcitationReport::required_rank)
      .def_readonly("noise_rank", &ExcitationReport::noise_rank)
      .def_property_readonly("ok", &ExcitationReport::ok);
  m.def("excitation_report", &excitation_report, py::arg("data"), py::arg("H_w"), py::arg("tol") = 1e-9);

  py::class_<FeasibleModelSet>(m, "FeasibleModelSet")
      .def_readonly("H_bar", &FeasibleModelSet::H_bar)
      .def_readonly("h_bar", &FeasibleModelSet::h_bar)
      .def_readonly("reduced_rows", &FeasibleModelSet::reduced_rows)
      .def_readonly("T", &FeasibleModelSet::T)
      .def("active_rows", &FeasibleModelSet::active_rows)
      .def("violation", &FeasibleModelSet::violation, py::arg("vec_m"));
  m.def("build_feasible_model_set",
        py::overload_cast<const DataMatrices&, const Polytope&>(&build_feasible_model_set), py::arg("data"),
        py::arg("W"));
  m.def("reduce_model_set", &reduce_model_set, py::arg("model_set"), py::arg("tol") = 1e-9);

  py::class_<PlantModel>(m, "PlantModel")
      .def(py::init<>())
      .def_readwrite("A", &PlantModel::A)
      .def_readwrite("B", &PlantModel::B)
      .def("M", &PlantModel::M)
      .def("step", &PlantModel::step, py::arg("x"), py::arg("u"), py::arg("p"), py::arg("w"));

  py::class_<io::ProblemConfig>(m, "ProblemConfig")
      .def_readwrite("name", &io::ProblemConfig::name)
      .def_readwrite("plant", &io::ProblemConfig::plant)
      .def_readwrite("X", &io::ProblemConfig::X)
      .def_readwrite("U", &io::ProblemConfig::U)
      .def_readwrite("W", &io::ProblemConfig::W)
      .def_readwrite("P_vertices", &io::ProblemConfig::P_vertices)
      .def_readwrite("reduce", &io::ProblemConfig::reduce)
      .def_property(
          "n_c", [](const io::ProblemConfig& c) { return c.tmpl.n_c; },
          [](io::ProblemConfig& c, int n_c) {
            if (c.tmpl.kind != "circular") throw Error(ErrorCode::InvalidConfig, "n_c is set by an explicit C");
            c.tmpl.n_c = n_c;
          })
      .def_property(
          "T", [](const io::ProblemConfig& c) { return c.data.T; }, [](io::ProblemConfig& c, int T) { c.data.T = T; })
      .def_property(
          "seed", [](const io::ProblemConfig& c) { return c.data.seed; },
          [](io::ProblemConfig& c, std::uint64_t s) { c.data.seed = s; })
      .def("to_json", [](const io::ProblemConfig& c) { return io::config_to_json(c); });
  m.def("parse_config", &io::parse_config, py::arg("text"));
  m.def("load_config", &io::load_config, py::arg("path"));
  m.def("example_config", &io::example_config, py::arg("plant"));

  m.def(
      "generate_data",
      [](const io::ProblemConfig& cfg) {
        if (!cfg.plant) throw Error(ErrorCode::InvalidConfig, "the config has no plant model");
        return generate_experiment_data(*cfg.plant, cfg.W, cfg.P_vertices, io::data_spec(cfg)).trajectory;
      },
      py::arg("config"), "Open-loop experiment using the config's data section.");

  py::class_<RCISolution>(m, "RCISolution")
      .def_readonly("q", &RCISolution::q)
      .def_readonly("vertex_states", &RCISolution::vertex_states)
      .def_readonly("vertex_inputs", &RCISolution::vertex_inputs)
      .def_readonly("epsilon", &RCISolution::epsilon)
      .def_readonly("d", &RCISolution::d)
      .def_readonly("objective", &RCISolution::objective)
      .def_readonly("volume", &RCISolution::volume)
      .def_property_readonly("diagnostics", [](const RCISolution& s) { return diagnostics_dict(s.diagnostics); })
      .def("to_json", [](const RCISolution& s, const std::string& mode, int T) {
        io::SolutionDocument doc;
        doc.solution = s;
        doc.mode = mode;
        doc.T = T;
        return io::solution_to_json(doc);
      }, py::arg("mode") = "data", py::arg("T") = 0);

  py::class_<SynthesisResult>(m, "SynthesisResult")
      .def_property_readonly("optimal", &SynthesisResult::optimal)
      .def_property_readonly("solution", &SynthesisResult::require)
      .def_property_readonly("infeasibility", [](const SynthesisResult& r) { return r.infeasibility.summary(); });

  m.def("synthesize", &synthesize_config, py::arg("config"), py::arg("data") = std::nullopt,
        py::arg("mode") = "data", py::call_guard<py::gil_scoped_release>(),
        "Solve the synthesis LP. Infeasibility is reported through SynthesisResult.optimal.");

  py::class_<InvarianceReport>(m, "InvarianceReport")
      .def_readonly("facet_slack", &InvarianceReport::facet_slack)
      .def_readonly("min_slack", &InvarianceReport::min_slack)
      .def_readonly("worst_facet", &InvarianceReport::worst_facet)
      .def_readonly("lp_count", &InvarianceReport::lp_count)
      .def("passed", &InvarianceReport::passed, py::arg("tol") = 1e-6);

  m.def(
      "verify",
      [](const RCISolution& sol, const io::ProblemConfig& cfg, const std::optional<TrajectoryData>& data) {
        SynthesisProblem prob = io::build_problem(cfg);
        if (!data) {
          if (!cfg.plant) throw Error(ErrorCode::InvalidConfig, "verification without data needs a plant");
          return verify_invariance(sol, prob, cfg.plant->M());
        }
        prob.model_set = build_feasible_model_set(build_data_matrices(*data), cfg.W);
        return verify_invariance(sol, prob);
      },
      py::arg("solution"), py::arg("config"), py::arg("data") = std::nullopt, py::call_guard<py::gil_scoped_release>(),
      "Invariance check over the full data model set, or against the config plant when no data is given.");

  m.def(
      "simulate",
      [](const RCISolution& sol, const io::ProblemConfig& cfg, int run) {
        if (!cfg.plant) throw Error(ErrorCode::InvalidConfig, "simulation needs a plant");
        const ClosedLoopTrace t =
            simulate_closed_loop(*cfg.plant, sol, io::build_problem(cfg), io::simulation_spec(cfg, sol, run));
        py::dict out;
        out["states"] = t.states;
        out["inputs"] = t.inputs;
        out["schedules"] = t.schedules;
        out["violations"] = t.violations();
        out["failure"] = t.failure;
        return out;
      },
      py::arg("solution"), py::arg("config"), py::arg("run") = 0);
}
