#include "ccrci/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ccrci/error.hpp"
#include "ccrci/lp.hpp"

namespace ccrci {

Matrix PlantModel::M() const {
  Matrix out(n(), (n() + m()) * s());
  for (Eigen::Index j = 0; j < s(); ++j) {
    out.block(0, j * n(), n(), n()) = A[j];
    out.block(0, s() * n() + j * m(), n(), m()) = B[j];
  }
  return out;
}

Vector PlantModel::step(const Vector& x, const Vector& u, const Vector& p, const Vector& w) const {
  if (p.size() != s()) throw Error(ErrorCode::ShapeMismatch, "scheduling vector has wrong length");
  Vector next = w;
  for (Eigen::Index j = 0; j < s(); ++j) next += p(j) * (A[j] * x + B[j] * u);
  return next;
}

namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

std::string normalize(std::string_view name) {
  std::string out(name);
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

}  // namespace

ExampleSetup build_example_plant(std::string_view which) {
  const std::string key = normalize(which);
  ExampleSetup ex;
  if (key == "double_integrator") {
    ex.name = key;
    Matrix A1(2, 2), A2(2, 2);
    A1 << 1.25, 1.25, 0, 1.25;
    A2 << 0.75, 0.75, 0, 0.75;
    ex.plant.A = {A1, A2};
    ex.plant.B = {Matrix(v2(0, 1.25)), Matrix(v2(0, 0.75))};
    ex.X = Polytope::symmetric_box(v2(5, 5));
    ex.U = Polytope::symmetric_box(Vector::Ones(1));
    ex.W = Polytope::symmetric_box(v2(0.25, 0));
    ex.P_vertices = {v2(1, 0), v2(0, 1)};
    ex.n_c = 50;
    ex.scheduling = {SchedulingLaw::Random, 0.1, 2.0};
    return ex;
  }
  if (key == "van_der_pol") {
    ex.name = key;
    const double Ts = 0.1, mu = 2.0;
    Matrix A1(2, 2), A2(2, 2);
    A1 << 1, Ts, -Ts, 1;
    A2 << 1, Ts, -Ts, 2;
    ex.plant.A = {A1, A2};
    ex.plant.B = {Matrix(v2(0, Ts)), Matrix(v2(0, Ts))};
    ex.X = Polytope::symmetric_box(v2(1, 1));
    ex.U = Polytope::symmetric_box(Vector::Ones(1));
    ex.W = Polytope::symmetric_box(v2(1e-3, 1e-3));
    ex.P_vertices = {v2(1, 0), v2(1 - mu * Ts, mu * Ts)};
    ex.n_c = 30;
    ex.scheduling = {SchedulingLaw::VanDerPol, Ts, mu};
    return ex;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown example plant '" + std::string(which) + "'");
}

Sampler::Sampler(std::uint64_t seed, SchedulingModel scheduling, DisturbanceMode disturbance)
    : rng_(seed), scheduling_(scheduling), disturbance_(disturbance) {}

Vector Sampler::schedule(const Vector& x, const VertexSet& P_vertices, bool& clipped) {
  clipped = false;
  if (scheduling_.law == SchedulingLaw::VanDerPol) {
    const double lo = 1.0 - scheduling_.mu * scheduling_.Ts;
    double p1 = 1.0 - scheduling_.mu * scheduling_.Ts * (1.0 - x(0) * x(0));
    if (p1 < lo || p1 > 1.0) {
      clipped = true;
      p1 = std::clamp(p1, lo, 1.0);
    }
    return v2(p1, 1.0 - p1);
  }
  const Vector alpha = rng_.simplex_weights(static_cast<Eigen::Index>(P_vertices.size()));
  Vector p = Vector::Zero(P_vertices.front().size());
  for (std::size_t j = 0; j < P_vertices.size(); ++j) p += alpha(static_cast<Eigen::Index>(j)) * P_vertices[j];
  return p;
}

Vector Sampler::disturbance(const Polytope& W) {
  if (cached_w_ != &W) {
    cached_w_ = &W;
    const Eigen::Index n = W.dim();
    w_lo_.resize(n);
    w_hi_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector e = Vector::Unit(n, i);
      w_hi_(i) = support(e, W);
      w_lo_(i) = -support(-e, W);
    }
    w_is_box_ = W.is_axis_aligned();
    w_vertices_ = enumerate_vertices(W);
  }
  if (disturbance_ == DisturbanceMode::Vertex) {
    return w_vertices_[rng_.below(w_vertices_.size())];
  }
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const Vector w = rng_.uniform_vector(w_lo_, w_hi_);
    if (w_is_box_ || W.contains(w, 0.0)) return w;
  }
  throw Error(ErrorCode::NumericalBreakdown, "disturbance rejection sampling failed");
}

GeneratedData generate_experiment_data(const PlantModel& plant, const Polytope& W, const VertexSet& P_vertices,
                                       const DataGenSpec& spec) {
  if (spec.T < 1) throw Error(ErrorCode::InvalidConfig, "data length T must be at least 1");
  if (!(spec.input_lo <= spec.input_hi)) throw Error(ErrorCode::InvalidConfig, "input range is empty");
  Sampler sampler(spec.seed, spec.scheduling, spec.disturbance);
  GeneratedData out;
  TrajectoryData& d = out.trajectory;
  d.states.push_back(spec.x0.size() ? spec.x0 : Vector::Zero(plant.n()));
  for (int t = 0; t < spec.T; ++t) {
    const Vector& x = d.states.back();
    bool clipped = false;
    Vector p = sampler.schedule(x, P_vertices, clipped);
    out.clipped_schedules += clipped ? 1 : 0;
    Vector u(plant.m());
    for (Eigen::Index i = 0; i < plant.m(); ++i) u(i) = sampler.uniform(spec.input_lo, spec.input_hi);
    const Vector w = sampler.disturbance(W);
    d.states.push_back(plant.step(x, u, p, w));
    d.inputs.push_back(std::move(u));
    d.schedules.push_back(std::move(p));
  }
  return out;
}

std::string_view to_string(ControllerMode mode) { return mode == ControllerMode::Convex ? "convex" : "min_sum"; }

ControlAction vertex_controller(const Vector& x, const RCISolution& sol, ControllerMode mode, double tol) {
  const auto k = static_cast<int>(sol.vertex_states.size());
  if (k == 0) throw Error(ErrorCode::InvalidConfig, "solution has no vertices");
  const Eigen::Index n = x.size();
  lp::LinearProgram prog;
  prog.add_variables(k, 0.0, 1.0, mode == ControllerMode::MinSum ? 1.0 : 0.0);
  for (Eigen::Index r = 0; r < n; ++r) {
    lp::SparseRow row;
    for (int i = 0; i < k; ++i) {
      if (sol.vertex_states[i](r) != 0.0) row.push_back({i, sol.vertex_states[i](r)});
    }
    prog.add_eq(std::move(row), x(r));
  }
  if (mode == ControllerMode::Convex) {
    lp::SparseRow sum;
    for (int i = 0; i < k; ++i) sum.push_back({i, 1.0});
    prog.add_eq(std::move(sum), 1.0);
  }
  lp::SolverOptions opts;
  opts.feas_tol = tol;
  const auto res = lp::solve(prog, opts);
  if (res.status != lp::Status::Optimal) {
    throw Error(ErrorCode::StateOutsideSet, "state cannot be interpolated from the RCI vertices");
  }
  ControlAction action;
  action.lambda = Eigen::Map<const Vector>(res.x.data(), k);
  action.u = Vector::Zero(sol.vertex_inputs.front().size());
  for (int i = 0; i < k; ++i) action.u += action.lambda(i) * sol.vertex_inputs[i];
  return action;
}

int ClosedLoopTrace::state_violations() const {
  return static_cast<int>(std::count(state_ok.begin(), state_ok.end(), false));
}

int ClosedLoopTrace::input_violations() const {
  return static_cast<int>(std::count(input_ok.begin(), input_ok.end(), false));
}

ClosedLoopTrace simulate_closed_loop(const PlantModel& plant, const RCISolution& sol, const SynthesisProblem& prob,
                                     const SimulationSpec& spec) {
  const Polytope S = prob.tmpl.polytope(sol.q);
  const double tol = spec.tol * std::max(1.0, sol.q.lpNorm<Eigen::Infinity>());
  Sampler sampler(spec.seed, spec.scheduling, spec.disturbance);
  ClosedLoopTrace trace;
  trace.states.push_back(spec.x0.size() ? spec.x0 : sol.vertex_states.front());
  trace.state_ok.push_back(S.contains(trace.states.back(), tol));
  for (int t = 0; t < spec.steps; ++t) {
    const Vector x = trace.states.back();
    bool clipped = false;
    const Vector p = sampler.schedule(x, prob.P_vertices, clipped);
    trace.clipped_schedules += clipped ? 1 : 0;
    ControlAction action;
    try {
      action = vertex_controller(x, sol, spec.mode);
    } catch (const Error& e) {
      if (!spec.audit || e.code() != ErrorCode::StateOutsideSet) throw;
      trace.failure = "step " + std::to_string(t) + ": " + e.what();
      break;
    }
    const Vector w = sampler.disturbance(prob.W);
    trace.inputs.push_back(action.u);
    trace.input_ok.push_back(prob.U.contains(action.u, tol));
    trace.schedules.push_back(p);
    trace.disturbances.push_back(w);
    trace.states.push_back(plant.step(x, action.u, p, w));
    trace.state_ok.push_back(S.contains(trace.states.back(), tol));
  }
  return trace;
}

std::string trace_to_csv(const ClosedLoopTrace& trace) {
  auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  const Eigen::Index n = trace.states.empty() ? 0 : trace.states.front().size();
  const Eigen::Index m = trace.inputs.empty() ? 0 : trace.inputs.front().size();
  const Eigen::Index s = trace.schedules.empty() ? 0 : trace.schedules.front().size();
  std::string out = "t";
  for (Eigen::Index i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  for (Eigen::Index i = 1; i <= m; ++i) out += ",u" + std::to_string(i);
  for (Eigen::Index i = 1; i <= s; ++i) out += ",p" + std::to_string(i);
  for (Eigen::Index i = 1; i <= n; ++i) out += ",w" + std::to_string(i);
  out += ",state_ok,input_ok\n";
  for (std::size_t t = 0; t < trace.states.size(); ++t) {
    const bool applied = t < trace.inputs.size();
    out += std::to_string(t);
    for (Eigen::Index i = 0; i < n; ++i) out += ',' + fmt(trace.states[t](i));
    for (Eigen::Index i = 0; i < m; ++i) out += ',' + (applied ? fmt(trace.inputs[t](i)) : std::string());
    for (Eigen::Index i = 0; i < s; ++i) out += ',' + (applied ? fmt(trace.schedules[t](i)) : std::string());
    for (Eigen::Index i = 0; i < n; ++i) out += ',' + (applied ? fmt(trace.disturbances[t](i)) : std::string());
    out += trace.state_ok[t] ? ",1" : ",0";
    out += applied ? (trace.input_ok[t] ? ",1" : ",0") : ",";
    out += '\n';
  }
  return out;
}

}  // namespace ccrci
