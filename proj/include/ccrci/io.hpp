#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccrci/dataset.hpp"
#include "ccrci/polytope.hpp"
#include "ccrci/runtime.hpp"
#include "ccrci/synthesis.hpp"

namespace ccrci::io {

inline constexpr int kSchemaVersion = 1;

struct TemplateConfig {
  std::string kind = "circular";  // "circular" or "explicit"
  int n_c = 0;
  Matrix C;      // explicit templates only
  Vector sigma;  // empty means all ones
};

struct SolverConfig {
  std::string id;  // empty selects lp::default_solver_id()
  InvarianceForm form = InvarianceForm::Auto;
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  long iteration_limit = 0;
};

struct DataConfig {
  int T = 100;
  double input_lo = -1.0, input_hi = 1.0;
  std::uint64_t seed = 1;
  DisturbanceMode disturbance = DisturbanceMode::Uniform;
};

struct SimulationConfig {
  int runs = 50;
  int steps = 200;
  std::uint64_t seed = 1;
  DisturbanceMode disturbance = DisturbanceMode::Uniform;
  ControllerMode controller = ControllerMode::Convex;
};

/// Parsed problem description. Everything except the sets, the scheduling
/// vertices and the template has a default.
struct ProblemConfig {
  std::string name;
  std::optional<PlantModel> plant;  // needed by gen-data, model mode and simulate
  Polytope X, U, W;
  VertexSet P_vertices;
  TemplateConfig tmpl;
  std::optional<Matrix> D;  // absent means D = C
  SchedulingModel scheduling;
  SolverConfig solver;
  bool reduce = true;
  DataConfig data;
  SimulationConfig simulation;
};

/// Throws ParseError for malformed JSON and InvalidConfig for unknown,
/// missing or mistyped fields or an unsupported schema version.
ProblemConfig parse_config(std::string_view json_text);
ProblemConfig load_config(const std::string& path);
std::string config_to_json(const ProblemConfig& cfg);
/// Configuration of a built-in example plant.
ProblemConfig example_config(std::string_view plant);

CCTemplate build_template(const ProblemConfig& cfg);
/// Synthesis problem without a model set or true model attached.
SynthesisProblem build_problem(const ProblemConfig& cfg);
SynthesisOptions synthesis_options(const ProblemConfig& cfg);
DataGenSpec data_spec(const ProblemConfig& cfg);
/// Spec of run `run`: seed base + run, starting at vertex run mod v_s.
SimulationSpec simulation_spec(const ProblemConfig& cfg, const RCISolution& sol, int run);
/// Model set built from the trajectory, reduced when cfg.reduce is set.
FeasibleModelSet model_set_from_data(const ProblemConfig& cfg, const TrajectoryData& traj);

struct SolutionDocument {
  RCISolution solution;
  std::string mode = "data";  // "data" or "model"
  std::string plant;
  int T = 0;  // data length, 0 in model mode
};

struct WriteOptions {
  bool timings = false;
  bool multipliers = false;
};

std::string solution_to_json(const SolutionDocument& doc, const WriteOptions& opts = {});
/// Throws ParseError or InvalidConfig.
SolutionDocument solution_from_json(std::string_view json_text);
SolutionDocument load_solution(const std::string& path);

/// Throws InvalidConfig when the file cannot be read or written.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

/// Polygon or polyline drawn in the coordinates of X.
struct SvgShape {
  VertexSet points;
  bool closed = true;
  std::string stroke = "#000000";
  std::string fill = "none";
  double stroke_width = 1.0;
  double opacity = 1.0;
  bool dashed = false;
  std::string id;
};

/// Vertices of a bounded planar polytope in counterclockwise order.
VertexSet polygon_outline(const Polytope& P);

/// SVG document whose viewBox is the bounding box of X plus a 5% margin.
/// The y axis points up.
std::string render_svg(const Polytope& X, const std::vector<SvgShape>& shapes, int pixels = 480);

}  // namespace ccrci::io
