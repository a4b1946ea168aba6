#include <doctest.h>

#include <string>

#include "ccrci/error.hpp"
#include "ccrci/linops.hpp"
#include "ccrci/runtime.hpp"
#include "support.hpp"

using namespace ccrci;

namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

struct Synthesized {
  ExampleSetup ex;
  SynthesisProblem prob;
  RCISolution sol;
};

// The Van der Pol example solves in well under a second with the true model.
const Synthesized& van_der_pol() {
  static const Synthesized cached = [] {
    Synthesized s;
    s.ex = build_example_plant("van_der_pol");
    s.prob = make_problem(build_cc_machinery(build_circular_template(s.ex.n_c), Vector::Ones(s.ex.n_c)), s.ex.X,
                          s.ex.U, s.ex.W, s.ex.P_vertices);
    s.sol = synthesize_model_based(s.prob, s.ex.plant.M()).require();
    return s;
  }();
  return cached;
}

RCISolution unit_square_solution() {
  RCISolution sol;
  sol.q = Vector::Ones(4);
  sol.vertex_states = {v2(1, 1), v2(-1, 1), v2(-1, -1), v2(1, -1)};
  sol.vertex_inputs = {Vector::Constant(1, 0.5), Vector::Constant(1, -0.25), Vector::Constant(1, 1.0),
                       Vector::Constant(1, -1.0)};
  return sol;
}

}  // namespace

TEST_CASE("example plants") {
  SUBCASE("double integrator") {
    const auto ex = build_example_plant("double_integrator");
    CHECK(ex.plant.s() == 2);
    CHECK(ex.plant.B[0].isApprox(Matrix(v2(0, 1.25))));
    CHECK(ex.plant.B[1].isApprox(Matrix(v2(0, 0.75))));
    CHECK(ex.plant.A[0](0, 1) == 1.25);
    REQUIRE(ex.P_vertices.size() == 2);
    CHECK(ex.P_vertices[0] == v2(1, 0));
    CHECK(ex.P_vertices[1] == v2(0, 1));
    CHECK(ex.n_c == 50);
  }
  SUBCASE("van der pol") {
    const auto ex = build_example_plant("van-der-pol");
    CHECK(ex.P_vertices[1].isApprox(v2(0.8, 0.2)));
    CHECK(support(v2(1, 0), ex.W) == doctest::Approx(1e-3));
    CHECK(support(v2(0, -1), ex.W) == doctest::Approx(1e-3));
    CHECK(ex.plant.A[1](1, 1) == 2.0);
    CHECK(ex.n_c == 30);
  }
  SUBCASE("unknown name") {
    try {
      (void)build_example_plant("pendulum");
      FAIL("expected InvalidConfig");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidConfig);
    }
  }
}

TEST_CASE("plant step matches the LPV regressor form") {
  const auto ex = build_example_plant("double_integrator");
  testing::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = rng.vector(2), u = rng.vector(1), w = rng.vector(2, -0.1, 0.1);
    const double a = rng.uniform();
    const Vector p = v2(a, 1 - a);
    const Vector expected = ex.plant.M() * linops::lpv_regressor(p, x, u) + w;
    CHECK((ex.plant.step(x, u, p, w) - expected).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("experiment data") {
  const auto ex = build_example_plant("double_integrator");
  DataGenSpec spec;
  spec.T = 100;
  spec.seed = 9;
  spec.scheduling = ex.scheduling;
  const auto a = generate_experiment_data(ex.plant, ex.W, ex.P_vertices, spec);
  const auto b = generate_experiment_data(ex.plant, ex.W, ex.P_vertices, spec);
  REQUIRE(a.trajectory.states.size() == 101);
  for (std::size_t t = 0; t < a.trajectory.states.size(); ++t) CHECK(a.trajectory.states[t] == b.trajectory.states[t]);
  const Matrix H_w = symmetric_form(ex.W).H;
  CHECK(excitation_check(build_data_matrices(a.trajectory), H_w));
  for (const auto& u : a.trajectory.inputs) CHECK(std::abs(u(0)) <= 1.0);
  CHECK_NOTHROW(validate_schedules(a.trajectory, ex.P_vertices));

  spec.T = 2;
  const auto short_run = generate_experiment_data(ex.plant, ex.W, ex.P_vertices, spec);
  CHECK_FALSE(excitation_check(build_data_matrices(short_run.trajectory), H_w));

  spec.T = 100;
  spec.seed = 10;
  const auto other = generate_experiment_data(ex.plant, ex.W, ex.P_vertices, spec);
  CHECK(other.trajectory.states.back() != a.trajectory.states.back());
}

TEST_CASE("van der pol schedules are clipped into the scheduling set") {
  const auto ex = build_example_plant("van_der_pol");
  Sampler sampler(1, ex.scheduling, DisturbanceMode::Uniform);
  bool clipped = false;
  const Vector inside = sampler.schedule(v2(0.5, 0), ex.P_vertices, clipped);
  CHECK_FALSE(clipped);
  CHECK(inside(0) == doctest::Approx(1 - 0.2 * 0.75));
  const Vector outside = sampler.schedule(v2(3, 0), ex.P_vertices, clipped);
  CHECK(clipped);
  CHECK(outside == v2(1, 0));
  CHECK(in_convex_hull(ex.P_vertices, sampler.schedule(v2(0, 0), ex.P_vertices, clipped)));
}

TEST_CASE("disturbance samples") {
  const auto ex = build_example_plant("double_integrator");
  Sampler uniform(4, ex.scheduling, DisturbanceMode::Uniform);
  Sampler vertex(4, ex.scheduling, DisturbanceMode::Vertex);
  const VertexSet corners = enumerate_vertices(ex.W);
  for (int k = 0; k < 200; ++k) {
    CHECK(ex.W.contains(uniform.disturbance(ex.W), 1e-12));
    const Vector w = vertex.disturbance(ex.W);
    CHECK(std::any_of(corners.begin(), corners.end(), [&](const Vector& c) { return (c - w).norm() <= 1e-12; }));
  }
}

TEST_CASE("vertex controller on the unit square") {
  const RCISolution sol = unit_square_solution();
  SUBCASE("a vertex is its own combination") {
    const auto action = vertex_controller(v2(1, 1), sol);
    Vector x = Vector::Zero(2);
    for (int i = 0; i < 4; ++i) x += action.lambda(i) * sol.vertex_states[i];
    CHECK((x - v2(1, 1)).norm() <= 1e-9);
    CHECK(action.lambda.sum() == doctest::Approx(1.0));
    CHECK(action.u(0) == doctest::Approx(0.5));
  }
  SUBCASE("the center uses convex weights") {
    const auto action = vertex_controller(v2(0, 0), sol);
    Vector x = Vector::Zero(2);
    for (int i = 0; i < 4; ++i) x += action.lambda(i) * sol.vertex_states[i];
    CHECK(x.norm() <= 1e-9);
    CHECK(action.lambda.sum() == doctest::Approx(1.0));
    CHECK(action.lambda.minCoeff() >= -1e-12);
    CHECK(action.u(0) >= -1.0 - 1e-12);
    CHECK(action.u(0) <= 1.0 + 1e-12);
  }
  SUBCASE("min-sum mode minimizes the weight sum") {
    const auto action = vertex_controller(v2(0, 0), sol, ControllerMode::MinSum);
    CHECK(action.lambda.sum() == doctest::Approx(0.0).epsilon(1e-9));
    const auto half = vertex_controller(v2(0.5, 0.5), sol, ControllerMode::MinSum);
    CHECK(half.lambda.sum() == doctest::Approx(0.5));
  }
  SUBCASE("outside the set") {
    try {
      (void)vertex_controller(v2(1.5, 0), sol);
      FAIL("expected StateOutsideSet");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::StateOutsideSet);
    }
  }
}

TEST_CASE("controller closure and one-step invariance on the van der pol set") {
  const auto& vdp = van_der_pol();
  const Polytope S = vdp.prob.tmpl.polytope(vdp.sol.q);
  const VertexSet w_vertices = enumerate_vertices(vdp.ex.W);
  const double tol = 1e-7 * std::max(1.0, vdp.sol.q.lpNorm<Eigen::Infinity>());
  Vector lo(2), hi(2);
  for (Eigen::Index j = 0; j < 2; ++j) {
    hi(j) = support(Vector::Unit(2, j), S);
    lo(j) = -support(-Vector::Unit(2, j), S);
  }
  testing::Rng rng(17);
  int samples = 0;
  while (samples < 500) {
    const Vector x = v2(rng.uniform(lo(0), hi(0)), rng.uniform(lo(1), hi(1)));
    if (!S.contains(x, 0.0)) continue;
    ++samples;
    const auto action = vertex_controller(x, vdp.sol);
    CHECK(vdp.ex.U.contains(action.u, tol));
    for (const auto& p : vdp.ex.P_vertices) {
      for (const auto& w : w_vertices) CHECK(S.contains(vdp.ex.plant.step(x, action.u, p, w), tol));
    }
  }
}

TEST_CASE("closed-loop simulation") {
  const auto& vdp = van_der_pol();
  SimulationSpec spec;
  spec.steps = 100;
  spec.scheduling = vdp.ex.scheduling;

  SUBCASE("trace is consistent with the plant recursion") {
    spec.seed = 5;
    const auto trace = simulate_closed_loop(vdp.ex.plant, vdp.sol, vdp.prob, spec);
    REQUIRE(trace.states.size() == 101);
    CHECK(trace.inputs.size() == 100);
    CHECK(trace.state_ok.size() == trace.states.size());
    CHECK(trace.input_ok.size() == trace.inputs.size());
    for (std::size_t t = 0; t < trace.inputs.size(); ++t) {
      const Vector next = vdp.ex.plant.step(trace.states[t], trace.inputs[t], trace.schedules[t], trace.disturbances[t]);
      CHECK(next == trace.states[t + 1]);
    }
    CHECK(trace.violations() == 0);
  }
  SUBCASE("every vertex start stays inside") {
    for (std::size_t i = 0; i < vdp.sol.vertex_states.size(); i += 5) {
      spec.x0 = vdp.sol.vertex_states[i];
      spec.seed = 100 + i;
      spec.disturbance = DisturbanceMode::Vertex;
      const auto trace = simulate_closed_loop(vdp.ex.plant, vdp.sol, vdp.prob, spec);
      CHECK(trace.failure.empty());
      CHECK(trace.violations() == 0);
    }
  }
  SUBCASE("same seed, same trace") {
    spec.seed = 8;
    const auto a = simulate_closed_loop(vdp.ex.plant, vdp.sol, vdp.prob, spec);
    const auto b = simulate_closed_loop(vdp.ex.plant, vdp.sol, vdp.prob, spec);
    CHECK(trace_to_csv(a) == trace_to_csv(b));
  }
  SUBCASE("start outside the set is reported in audit mode") {
    spec.x0 = v2(5, 5);
    const auto trace = simulate_closed_loop(vdp.ex.plant, vdp.sol, vdp.prob, spec);
    CHECK_FALSE(trace.failure.empty());
    CHECK(trace.violations() > 0);
    spec.audit = false;
    CHECK_THROWS_AS((void)simulate_closed_loop(vdp.ex.plant, vdp.sol, vdp.prob, spec), Error);
  }
}

TEST_CASE("zero disturbance at a fixed scheduling vertex") {
  const auto& vdp = van_der_pol();
  const Polytope zero = Polytope::symmetric_box(v2(0, 0));
  SynthesisProblem prob = vdp.prob;
  prob.W = zero;
  prob.P_vertices = {vdp.ex.P_vertices[1]};
  SimulationSpec spec;
  spec.steps = 50;
  spec.x0 = vdp.sol.vertex_states[3];
  const auto trace = simulate_closed_loop(vdp.ex.plant, vdp.sol, prob, spec);
  CHECK(trace.violations() == 0);
  for (const auto& w : trace.disturbances) CHECK(w.norm() == 0.0);
  for (const auto& p : trace.schedules) CHECK(p == vdp.ex.P_vertices[1]);
}

TEST_CASE("trace csv layout") {
  const auto& vdp = van_der_pol();
  SimulationSpec spec;
  spec.steps = 3;
  spec.scheduling = vdp.ex.scheduling;
  const std::string csv = trace_to_csv(simulate_closed_loop(vdp.ex.plant, vdp.sol, vdp.prob, spec));
  CHECK(csv.rfind("t,x1,x2,u1,p1,p2,w1,w2,state_ok,input_ok\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
