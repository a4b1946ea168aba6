#include <doctest.h>

#include <algorithm>

#include "ccrci/error.hpp"
#include "ccrci/linops.hpp"
#include "ccrci/runtime.hpp"
#include "ccrci/synthesis.hpp"
#include "support.hpp"

using namespace ccrci;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Polytope interval(double lo, double hi) { return Polytope::box(vec({lo}), vec({hi})); }

CCTemplate interval_template() {
  Matrix C(2, 1);
  C << 1, -1;
  return build_cc_machinery(C, Vector::Ones(2));
}

// x+ = a x + b u + w on |x| <= 5, |w| <= 0.1.
SynthesisProblem scalar_problem(const Polytope& U) {
  return make_problem(interval_template(), interval(-5, 5), U, interval(-0.1, 0.1), {vec({1.0})});
}

FeasibleModelSet scalar_model_set(double a, double b, int T, std::uint64_t seed) {
  PlantModel plant{{Matrix::Constant(1, 1, a)}, {Matrix::Constant(1, 1, b)}};
  DataGenSpec spec;
  spec.T = T;
  spec.seed = seed;
  const auto data = generate_experiment_data(plant, interval(-0.1, 0.1), {vec({1.0})}, spec);
  return reduce_model_set(build_feasible_model_set(build_data_matrices(data.trajectory), interval(-0.1, 0.1)));
}

// A small open-loop unstable LPV plant with two scheduling vertices.
PlantModel test_plant() {
  Matrix A1(2, 2), A2(2, 2), B1(2, 1), B2(2, 1);
  A1 << 1.05, 0.2, 0.0, 1.02;
  A2 << 0.95, -0.1, 0.1, 1.05;
  B1 << 0.0, 1.0;
  B2 << 0.2, 0.8;
  return {{A1, A2}, {B1, B2}};
}

constexpr double kNoise = 0.005;
const VertexSet kSimplex2 = {vec({1, 0}), vec({0, 1})};

SynthesisProblem plane_problem(int n_c) {
  return make_problem(build_cc_machinery(build_circular_template(n_c), Vector::Ones(n_c)),
                      Polytope::symmetric_box(vec({2, 2})), Polytope::symmetric_box(vec({1})),
                      Polytope::symmetric_box(Vector::Constant(2, kNoise)), kSimplex2);
}

TrajectoryData plane_data(int T, std::uint64_t seed) {
  DataGenSpec spec;
  spec.T = T;
  spec.seed = seed;
  return generate_experiment_data(test_plant(), Polytope::symmetric_box(Vector::Constant(2, kNoise)), kSimplex2, spec)
      .trajectory;
}

FeasibleModelSet plane_model_set(const TrajectoryData& traj) {
  return reduce_model_set(
      build_feasible_model_set(build_data_matrices(traj), Polytope::symmetric_box(Vector::Constant(2, kNoise))));
}

// Largest C_k M z over a polytopic model set, by enumerating its vertices.
double brute_force_max(const VertexSet& model_vertices, const Vector& z, const Vector& c_k) {
  double best = -std::numeric_limits<double>::infinity();
  const auto n = c_k.size();
  for (const auto& v : model_vertices) {
    const Matrix M = Eigen::Map<const Matrix>(v.data(), n, v.size() / n);
    best = std::max(best, c_k.dot(M * z));
  }
  return best;
}

}  // namespace

TEST_CASE("configuration rows: one per facet and vertex, including trivially satisfied rows") {
  const CCTemplate t = build_cc_machinery(build_circular_template(50), Vector::Ones(50));
  lp::LinearProgram prog;
  VariableLayout L;
  L.n_c = 50;
  L.q = prog.add_variables(50);
  assemble_config_constraints(prog, L, t);
  CHECK(prog.num_rows() == 2500);
  for (const auto& row : prog.rows()) CHECK(row.group == kConfigGroup);
}

TEST_CASE("configuration rows flag a stretched facet of the hexagon") {
  const CCTemplate t = build_cc_machinery(build_circular_template(6), Vector::Ones(6));
  lp::LinearProgram prog;
  VariableLayout L;
  L.n_c = 6;
  L.q = prog.add_variables(6);
  assemble_config_constraints(prog, L, t);

  const std::vector<double> ones(6, 1.0);
  for (int r = 0; r < prog.num_rows(); ++r) CHECK(prog.row_activity(r, ones) <= 1e-12);

  std::vector<double> stretched = ones;
  stretched[0] = 3.0;
  int violated = 0;
  for (int r = 0; r < prog.num_rows(); ++r) {
    if (prog.row_activity(r, stretched) <= 1e-9) continue;
    ++violated;
    const auto& I = t.vertex_index_sets[static_cast<std::size_t>(r / 6)];
    CHECK(std::find(I.begin(), I.end(), 0) != I.end());
  }
  CHECK(violated > 0);
}

TEST_CASE("system rows for the double-integrator shapes") {
  const auto ex = build_example_plant("double_integrator");
  const auto prob = make_problem(build_cc_machinery(build_circular_template(50), Vector::Ones(50)), ex.X, ex.U,
                                 ex.W, ex.P_vertices);
  lp::LinearProgram prog;
  const VariableLayout L = add_core_variables(prog, prob);
  assemble_system_constraints(prog, L, prob);
  CHECK(prog.num_rows() == (4 + 2) * 50);
}

TEST_CASE("zero input set pins the vertex inputs") {
  auto prob = scalar_problem(interval(0, 0));
  const auto res = synthesize_model_based(prob, (Matrix(1, 2) << 0.5, 1.0).finished());
  REQUIRE(res.optimal());
  for (const auto& u : res.solution.vertex_inputs) CHECK(std::abs(u(0)) <= 1e-9);
}

TEST_CASE("scalar plant: the whole state interval is invariant") {
  const Matrix M = (Matrix(1, 2) << 0.5, 1.0).finished();
  auto prob = scalar_problem(interval(-1, 1));

  SUBCASE("model-based") {
    const auto res = synthesize_model_based(prob, M);
    const auto& sol = res.require();
    CHECK(sol.q(0) == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(sol.q(1) == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(verify_invariance(sol, prob, M).passed());
  }
  SUBCASE("data-driven") {
    prob.model_set = scalar_model_set(0.5, 1.0, 40, 3);
    const auto res = synthesize(prob);
    const auto& sol = res.require();
    CHECK(std::abs(sol.q(0) - 5.0) <= 1e-6);
    CHECK(std::abs(sol.q(1) - 5.0) <= 1e-6);
    CHECK(check_certificate(sol, prob).passed());
    CHECK(verify_invariance(sol, prob).passed());
  }
}

TEST_CASE("doubling map without input admits no invariant interval") {
  auto prob = scalar_problem(interval(0, 0));

  SUBCASE("model-based") {
    const auto res = synthesize_model_based(prob, (Matrix(1, 2) << 2.0, 0.0).finished());
    CHECK_FALSE(res.optimal());
    CHECK(!res.infeasibility.group_counts.empty());
    try {
      (void)res.require();
      FAIL("expected SynthesisInfeasible");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SynthesisInfeasible);
    }
  }
  SUBCASE("data-driven") {
    prob.model_set = scalar_model_set(2.0, 1.0, 12, 5);
    CHECK_FALSE(synthesize(prob).optimal());
  }
}

TEST_CASE("multiplier certificate holds exactly when the vertex-enumerated worst case does") {
  testing::Rng rng(42);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const bool planar = trial % 2 == 1;
    const Eigen::Index s = planar ? 1 : 1 + trial % 3;
    const Eigen::Index n = planar ? 2 : 1;
    const Eigen::Index params = n * (n + 1) * s;

    VertexSet P;
    for (Eigen::Index j = 0; j < s; ++j) P.push_back(Vector::Unit(s, j));
    const CCTemplate tmpl = planar ? build_cc_machinery(build_circular_template(4), Vector::Ones(4))
                                   : interval_template();
    const Polytope X = planar ? Polytope::symmetric_box(vec({3, 3})) : interval(-3, 3);
    const Polytope W = planar ? Polytope::symmetric_box(vec({0.05, 0.05})) : interval(-0.05, 0.05);
    SynthesisProblem prob = make_problem(tmpl, X, Polytope::symmetric_box(vec({1})), W, P);

    // A random parallelotope around a random model (2 * params <= 12 rows).
    const Matrix R = rng.matrix(params, params) + 2.0 * Matrix::Identity(params, params);
    const Vector center = rng.vector(params, -0.6, 0.6);
    const Vector half = rng.vector(params, 0.05, 0.3);
    FeasibleModelSet F;
    F.n = n;
    F.m = 1;
    F.s = s;
    F.H_bar.resize(2 * params, params);
    F.H_bar << R, -R;
    F.h_bar.resize(2 * params);
    F.h_bar << R * center + half, -(R * center) + half;
    prob.model_set = F;
    const VertexSet model_vertices = enumerate_vertices(Polytope(F.H_bar, F.h_bar));

    // Random candidate offsets and inputs.
    Vector q = rng.vector(tmpl.num_facets(), 0.5, 2.5);
    if (planar) q = Vector::Constant(4, rng.uniform(0.5, 2.5));
    std::vector<Vector> inputs;
    for (Eigen::Index i = 0; i < tmpl.num_vertices(); ++i) inputs.push_back(rng.vector(1));
    const Vector d = support_vector(tmpl.C, W);

    double margin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < tmpl.num_vertices(); ++i) {
      for (const auto& p : P) {
        const Vector z = linops::lpv_regressor(p, tmpl.V_maps[i] * q, inputs[i]);
        for (Eigen::Index k = 0; k < tmpl.num_facets(); ++k) {
          margin = std::min(margin, q(k) - d(k) - brute_force_max(model_vertices, z, tmpl.C.row(k).transpose()));
        }
      }
    }
    if (std::abs(margin) < 1e-6) continue;

    std::vector<InvarianceForm> forms = {InvarianceForm::Full};
    if (!planar) forms.push_back(InvarianceForm::Separable);
    for (const auto form : forms) {
      lp::LinearProgram prog;
      const VariableLayout L = add_core_variables(prog, prob);
      for (Eigen::Index k = 0; k < q.size(); ++k) prog.set_bounds(L.q + static_cast<int>(k), q(k), q(k));
      for (Eigen::Index i = 0; i < tmpl.num_vertices(); ++i) {
        prog.set_bounds(L.u_index(i), inputs[i](0), inputs[i](0));
      }
      (void)assemble_invariance_constraints(prog, L, prob, d, form);
      const auto res = lp::solve(prog);
      INFO("trial " << trial << " form " << to_string(form) << " margin " << margin);
      CHECK((res.status == lp::Status::Optimal) == (margin > 0.0));
    }
    (margin > 0.0 ? feasible : infeasible) += 1;
  }
  CHECK(feasible >= 5);
  CHECK(infeasible >= 5);
}

TEST_CASE("full and separable invariance forms give the same optimum") {
  auto prob = plane_problem(8);
  prob.model_set = plane_model_set(plane_data(80, 11));
  REQUIRE(is_row_separable(*prob.model_set));

  SynthesisOptions full, sep;
  full.form = InvarianceForm::Full;
  sep.form = InvarianceForm::Separable;
  const auto a = synthesize(prob, full).require();
  const auto b = synthesize(prob, sep).require();
  CHECK(a.diagnostics.form == InvarianceForm::Full);
  CHECK(b.diagnostics.form == InvarianceForm::Separable);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-7));
  CHECK(check_certificate(a, prob).passed());
  CHECK(check_certificate(b, prob).passed());
  CHECK(verify_invariance(b, prob).passed());
  for (const auto& lam : b.multipliers) CHECK(lam.minCoeff() >= -1e-9);
}

TEST_CASE("a singleton model set reproduces the model-based optimum") {
  auto prob = plane_problem(8);
  const Matrix M = test_plant().M();
  const Eigen::Index p = M.size();
  FeasibleModelSet F;
  F.n = 2;
  F.m = 1;
  F.s = 2;
  F.H_bar.resize(2 * p, p);
  F.H_bar << Matrix::Identity(p, p), -Matrix::Identity(p, p);
  const Vector v = Eigen::Map<const Vector>(M.data(), p);
  F.h_bar.resize(2 * p);
  F.h_bar << v, -v;
  prob.model_set = F;

  const auto data = synthesize(prob).require();
  const auto model = synthesize_model_based(prob, M).require();
  CHECK(data.objective == doctest::Approx(model.objective).epsilon(1e-7));
  CHECK(verify_invariance(model, prob, M).passed());
}

TEST_CASE("optimal solutions carry a valid certificate and survive verification") {
  auto prob = plane_problem(8);
  prob.model_set = plane_model_set(plane_data(80, 11));
  const auto sol = synthesize(prob).require();

  const auto cert = check_certificate(sol, prob);
  CHECK(cert.passed());
  CHECK(cert.config <= 1e-7);
  CHECK(cert.multiplier <= 1e-7);

  const auto report = verify_invariance(sol, prob);
  CHECK(report.passed());
  CHECK(report.lp_count == 8 * 2 * 8);
  CHECK(sol.volume.has_value());
  CHECK(*sol.volume > 0.0);
  CHECK(sol.objective == doctest::Approx(sol.epsilon.lpNorm<1>()));

  SUBCASE("inflating an active facet breaks invariance") {
    int active = 0, broken = 0;
    for (Eigen::Index k = 0; k < report.facet_slack.size(); ++k) {
      if (report.facet_slack(k) > 1e-6 || sol.q(k) <= 0.0) continue;
      ++active;
      RCISolution bumped = sol;
      bumped.q(k) *= 1.1;
      for (std::size_t i = 0; i < bumped.vertex_states.size(); ++i) {
        bumped.vertex_states[i] = prob.tmpl.V_maps[i] * bumped.q;
      }
      const double slack = verify_invariance(bumped, prob).min_slack;
      if (slack < 0.0) ++broken;
    }
    REQUIRE(active > 0);
    CHECK(broken > 0);
  }
}

TEST_CASE("interpolated inputs keep every feasible model inside the set") {
  auto prob = plane_problem(8);
  prob.model_set = plane_model_set(plane_data(80, 11));
  const auto sol = synthesize(prob).require();
  const Polytope S = prob.tmpl.polytope(sol.q);
  const auto& F = *prob.model_set;

  // Vertices of the model set reached by random linear objectives.
  std::vector<Matrix> models;
  testing::Rng rng(7);
  lp::LinearProgram base;
  base.add_variables(static_cast<int>(F.num_params()));
  for (Eigen::Index r = 0; r < F.H_bar.rows(); ++r) {
    lp::SparseRow row;
    for (Eigen::Index c = 0; c < F.H_bar.cols(); ++c) row.push_back({static_cast<int>(c), F.H_bar(r, c)});
    base.add_le(std::move(row), F.h_bar(r));
  }
  while (models.size() < 20) {
    lp::LinearProgram prog = base;
    for (int c = 0; c < prog.num_variables(); ++c) prog.set_cost(c, rng.uniform(-1, 1));
    const auto res = lp::solve(prog);
    REQUIRE(res.status == lp::Status::Optimal);
    models.push_back(Eigen::Map<const Matrix>(res.x.data(), 2, 6));
  }
  const VertexSet w_vertices = enumerate_vertices(prob.W);

  Vector lo(2), hi(2);
  for (Eigen::Index j = 0; j < 2; ++j) {
    hi(j) = support(Vector::Unit(2, j), S);
    lo(j) = -support(-Vector::Unit(2, j), S);
  }
  const double tol = 1e-7 * std::max(1.0, sol.q.lpNorm<Eigen::Infinity>());
  int samples = 0;
  while (samples < 100) {
    Vector x(2);
    for (Eigen::Index j = 0; j < 2; ++j) x(j) = rng.uniform(lo(j), hi(j));
    if (!S.contains(x, 0.0)) continue;
    ++samples;
    const double a = rng.uniform();
    const Vector p = vec({a, 1.0 - a});
    const auto action = vertex_controller(x, sol);
    CHECK(prob.U.contains(action.u, tol));
    const Vector z = linops::lpv_regressor(p, x, action.u);
    for (const auto& M : models) {
      for (const auto& w : w_vertices) CHECK(S.contains(M * z + w, tol));
    }
  }
}

// Nested model sets relax the LP, so the optimal distance cannot grow. The
// area is not the objective and carries no such guarantee.
TEST_CASE("longer prefixes of one trajectory never increase the distance to X") {
  const auto traj = plane_data(120, 21);
  double last_objective = std::numeric_limits<double>::infinity();
  for (int T : {30, 60, 120}) {
    auto prob = plane_problem(8);
    prob.model_set = plane_model_set(traj.prefix(T));
    const auto sol = synthesize(prob).require();
    INFO("T = " << T);
    CHECK(sol.objective <= last_objective + 1e-6);
    last_objective = sol.objective;
  }
}

TEST_CASE("problem validation") {
  auto prob = plane_problem(6);
  SUBCASE("data-driven synthesis without a model set") {
    try {
      (void)synthesize(prob);
      FAIL("expected EmptyModelSet");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyModelSet);
    }
  }
  SUBCASE("model matrix of the wrong shape") {
    try {
      (void)synthesize_model_based(prob, Matrix::Zero(2, 5));
      FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ShapeMismatch);
    }
  }
  SUBCASE("empty model set") {
    FeasibleModelSet F;
    F.n = 2;
    F.m = 1;
    F.s = 2;
    F.H_bar.resize(2, 12);
    F.H_bar.setZero();
    F.H_bar(0, 0) = 1.0;
    F.H_bar(1, 0) = -1.0;
    F.h_bar = vec({-1.0, -1.0});
    prob.model_set = F;
    try {
      (void)synthesize(prob);
      FAIL("expected EmptyModelSet");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyModelSet);
    }
  }
}

TEST_CASE("solution volume of the unit square template") {
  const CCTemplate t = build_cc_machinery(build_circular_template(4), Vector::Ones(4));
  CHECK(solution_volume(t, Vector::Ones(4)) == doctest::Approx(4.0));
  CHECK(solution_volume(t, Vector::Zero(4)) == 0.0);
}
