#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ccrci/dataset.hpp"
#include "ccrci/polytope.hpp"
#include "ccrci/random.hpp"
#include "ccrci/synthesis.hpp"

namespace ccrci {

/// x+ = sum_j p_j (A^j x + B^j u) + w, known only to the simulator.
struct PlantModel {
  std::vector<Matrix> A;
  std::vector<Matrix> B;

  Eigen::Index n() const { return A.empty() ? 0 : A.front().rows(); }
  Eigen::Index m() const { return B.empty() ? 0 : B.front().cols(); }
  Eigen::Index s() const { return static_cast<Eigen::Index>(A.size()); }
  /// [A^1 ... A^s B^1 ... B^s], the matrix acting on the LPV regressor.
  Matrix M() const;
  Vector step(const Vector& x, const Vector& u, const Vector& p, const Vector& w) const;
};

/// How scheduling samples are produced.
///  Random: uniform convex weights over the vertices of the scheduling set.
///  VanDerPol: p_1 = 1 - mu Ts (1 - x_1^2), p_2 = 1 - p_1, clipped to [1 - mu Ts, 1].
enum class SchedulingLaw { Random, VanDerPol };

struct SchedulingModel {
  SchedulingLaw law = SchedulingLaw::Random;
  double Ts = 0.1;
  double mu = 2.0;
};

enum class DisturbanceMode { Uniform, Vertex };

struct ExampleSetup {
  std::string name;
  PlantModel plant;
  Polytope X, U, W;
  VertexSet P_vertices;
  int n_c = 0;
  SchedulingModel scheduling;
};

/// "double_integrator" or "van_der_pol" (dashes accepted). Throws InvalidConfig otherwise.
ExampleSetup build_example_plant(std::string_view which);

/// Draws scheduling and disturbance samples; all draws come from one seeded stream.
class Sampler {
 public:
  Sampler(std::uint64_t seed, SchedulingModel scheduling, DisturbanceMode disturbance);

  /// Scheduling value for state x; sets `clipped` when the law left the set.
  Vector schedule(const Vector& x, const VertexSet& P_vertices, bool& clipped);
  Vector disturbance(const Polytope& W);
  double uniform(double lo, double hi) { return rng_.uniform(lo, hi); }

 private:
  Rng rng_;
  SchedulingModel scheduling_;
  DisturbanceMode disturbance_;
  const Polytope* cached_w_ = nullptr;
  Vector w_lo_, w_hi_;
  VertexSet w_vertices_;
  bool w_is_box_ = false;
};

struct DataGenSpec {
  int T = 100;
  double input_lo = -1.0, input_hi = 1.0;
  std::uint64_t seed = 1;
  Vector x0;  // empty means the origin
  SchedulingModel scheduling;
  DisturbanceMode disturbance = DisturbanceMode::Uniform;
};

struct GeneratedData {
  TrajectoryData trajectory;
  int clipped_schedules = 0;
};

GeneratedData generate_experiment_data(const PlantModel& plant, const Polytope& W, const VertexSet& P_vertices,
                                       const DataGenSpec& spec);

///  Convex: sum lambda = 1 added to the interpolation LP.
///  MinSum: min sum lambda subject to sum lambda_i x^i = x, 0 <= lambda <= 1.
enum class ControllerMode { Convex, MinSum };
std::string_view to_string(ControllerMode mode);

struct ControlAction {
  Vector u;
  Vector lambda;
};

/// Throws StateOutsideSet when x cannot be interpolated from the vertices.
ControlAction vertex_controller(const Vector& x, const RCISolution& sol, ControllerMode mode = ControllerMode::Convex,
                                double tol = 1e-9);

struct SimulationSpec {
  int steps = 200;
  Vector x0;  // empty means vertex 0 of the solution
  SchedulingModel scheduling;
  DisturbanceMode disturbance = DisturbanceMode::Uniform;
  std::uint64_t seed = 1;
  ControllerMode mode = ControllerMode::Convex;
  bool audit = true;   // record controller failures instead of throwing
  double tol = 1e-7;   // membership tolerance, relative to max(1, |q|)
};

struct ClosedLoopTrace {
  std::vector<Vector> states;        // steps + 1 entries (fewer if stopped early)
  std::vector<Vector> inputs;        // one per applied step
  std::vector<Vector> schedules;
  std::vector<Vector> disturbances;
  std::vector<bool> state_ok;        // per recorded state
  std::vector<bool> input_ok;        // per applied input
  int clipped_schedules = 0;
  std::string failure;               // controller failure message in audit mode

  int state_violations() const;
  int input_violations() const;
  int violations() const { return state_violations() + input_violations() + (failure.empty() ? 0 : 1); }
};

ClosedLoopTrace simulate_closed_loop(const PlantModel& plant, const RCISolution& sol, const SynthesisProblem& prob,
                                     const SimulationSpec& spec);

/// One row per step: t, x, u, p, w, state_ok, input_ok.
std::string trace_to_csv(const ClosedLoopTrace& trace);

}  // namespace ccrci
