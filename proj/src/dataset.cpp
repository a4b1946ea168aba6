#include "ccrci/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ccrci/error.hpp"
#include "ccrci/lp.hpp"

namespace ccrci {

void TrajectoryData::validate() const {
  if (states.size() != inputs.size() + 1 || schedules.size() != inputs.size()) {
    throw Error(ErrorCode::LengthMismatch, "trajectory needs T+1 states, T inputs and T schedules (got " +
                                               std::to_string(states.size()) + ", " + std::to_string(inputs.size()) +
                                               ", " + std::to_string(schedules.size()) + ")");
  }
  if (inputs.empty()) throw Error(ErrorCode::LengthMismatch, "trajectory has no transitions");
  auto uniform = [](const std::vector<Vector>& vs, const char* what) {
    for (std::size_t t = 0; t < vs.size(); ++t) {
      if (vs[t].size() != vs.front().size() || vs[t].size() == 0) {
        throw Error(ErrorCode::ShapeMismatch, std::string(what) + " sample " + std::to_string(t) + " has wrong size");
      }
      if (!vs[t].allFinite()) {
        throw Error(ErrorCode::NumericalBreakdown, std::string(what) + " sample " + std::to_string(t) + " is not finite");
      }
    }
  };
  uniform(states, "state");
  uniform(inputs, "input");
  uniform(schedules, "schedule");
}

TrajectoryData TrajectoryData::prefix(int T) const {
  if (T < 1 || T > horizon()) throw Error(ErrorCode::LengthMismatch, "prefix length out of range");
  TrajectoryData out;
  out.states.assign(states.begin(), states.begin() + T + 1);
  out.inputs.assign(inputs.begin(), inputs.begin() + T);
  out.schedules.assign(schedules.begin(), schedules.begin() + T);
  return out;
}

DataMatrices build_data_matrices(const TrajectoryData& traj) {
  traj.validate();
  DataMatrices D;
  D.n = traj.state_dim();
  D.m = traj.input_dim();
  D.s = traj.schedule_dim();
  const int T = traj.horizon();
  D.X_plus.resize(D.n, T);
  D.X_pu.resize((D.n + D.m) * D.s, T);
  for (int t = 0; t < T; ++t) {
    D.X_plus.col(t) = traj.states[t + 1];
    D.X_pu.col(t) = linops::lpv_regressor(traj.schedules[t], traj.states[t], traj.inputs[t]);
  }
  return D;
}

ExcitationReport excitation_report(const DataMatrices& D, const Matrix& H_w, double tol) {
  ExcitationReport r;
  r.required_rank = (D.n + D.m) * D.s;
  r.state_dim = D.n;
  r.data_rank = D.X_pu.size() == 0 ? 0 : linops::numerical_rank(D.X_pu, tol);
  r.noise_rank = H_w.size() == 0 ? 0 : linops::numerical_rank(H_w, tol);
  return r;
}

SymmetricSet symmetric_form(const Polytope& W, double tol) {
  const Eigen::Index rows = W.num_rows();
  std::vector<bool> used(static_cast<std::size_t>(rows), false);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (used[r]) continue;
    used[r] = true;
    bool paired = false;
    for (Eigen::Index k = r + 1; k < rows && !paired; ++k) {
      if (used[k]) continue;
      const double scale = std::max(1.0, W.H().row(r).lpNorm<Eigen::Infinity>());
      if ((W.H().row(r) + W.H().row(k)).lpNorm<Eigen::Infinity>() <= tol * scale &&
          std::abs(W.h()(r) - W.h()(k)) <= tol * std::max(1.0, std::abs(W.h()(r)))) {
        used[k] = true;
        paired = true;
      }
    }
    if (!paired) {
      throw Error(ErrorCode::AsymmetricDisturbanceSet,
                  "disturbance row " + std::to_string(r) + " has no mirrored partner with the same offset");
    }
    keep.push_back(r);
  }
  SymmetricSet out;
  out.H.resize(static_cast<Eigen::Index>(keep.size()), W.dim());
  out.h.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t a = 0; a < keep.size(); ++a) {
    out.H.row(static_cast<Eigen::Index>(a)) = W.H().row(keep[a]);
    out.h(static_cast<Eigen::Index>(a)) = W.h()(keep[a]);
  }
  if ((out.h.array() < 0.0).any()) throw Error(ErrorCode::Empty, "disturbance set has a negative offset");
  return out;
}

FeasibleModelSet build_feasible_model_set(const DataMatrices& D, const SymmetricSet& W) {
  if (W.H.cols() != D.n || W.H.rows() != W.h.size()) {
    throw Error(ErrorCode::ShapeMismatch, "disturbance set does not match the state dimension");
  }
  const Eigen::Index T = D.X_plus.cols();
  const Eigen::Index n_w = W.H.rows();
  const Matrix H_M = linops::kron(D.X_pu.transpose(), W.H);
  const Vector h_M = linops::vec(W.H * D.X_plus);
  const Vector h_w = W.h.replicate(T, 1);

  FeasibleModelSet F;
  F.H_bar.resize(2 * T * n_w, H_M.cols());
  F.H_bar << H_M, -H_M;
  F.h_bar.resize(2 * T * n_w);
  F.h_bar << h_w + h_M, h_w - h_M;
  F.noise = W;
  F.n = D.n;
  F.m = D.m;
  F.s = D.s;
  F.T = static_cast<int>(T);
  return F;
}

FeasibleModelSet build_feasible_model_set(const DataMatrices& D, const Polytope& W) {
  return build_feasible_model_set(D, symmetric_form(W));
}

std::vector<int> FeasibleModelSet::active_rows() const {
  if (reduced_rows) return *reduced_rows;
  std::vector<int> all(static_cast<std::size_t>(H_bar.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return all;
}

Matrix FeasibleModelSet::active_H() const {
  const auto rows = active_rows();
  Matrix out(static_cast<Eigen::Index>(rows.size()), H_bar.cols());
  for (std::size_t a = 0; a < rows.size(); ++a) out.row(static_cast<Eigen::Index>(a)) = H_bar.row(rows[a]);
  return out;
}

Vector FeasibleModelSet::active_h() const {
  const auto rows = active_rows();
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t a = 0; a < rows.size(); ++a) out(static_cast<Eigen::Index>(a)) = h_bar(rows[a]);
  return out;
}

double FeasibleModelSet::violation(const Vector& vec_m) const {
  if (vec_m.size() != H_bar.cols()) throw Error(ErrorCode::ShapeMismatch, "model vector has wrong length");
  return (H_bar * vec_m - h_bar).maxCoeff();
}

namespace {

lp::LinearProgram rows_lp(const Matrix& H, const Vector& h, const std::vector<int>& rows, int skip) {
  lp::LinearProgram prog;
  prog.add_variables(static_cast<int>(H.cols()));
  for (int r : rows) {
    if (r == skip) continue;
    lp::SparseRow terms;
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
      if (H(r, j) != 0.0) terms.push_back({static_cast<int>(j), H(r, j)});
    }
    prog.add_le(std::move(terms), h(r));
  }
  return prog;
}

}  // namespace

FeasibleModelSet reduce_model_set(const FeasibleModelSet& F, double tol) {
  const Matrix& H = F.H_bar;
  const Vector& h = F.h_bar;

  // Duplicate rows after normalization: keep the tightest copy.
  std::vector<int> candidates;
  std::vector<Vector> normals;
  std::vector<double> offsets;
  for (int r : F.active_rows()) {
    const double scale = H.row(r).lpNorm<Eigen::Infinity>();
    if (scale == 0.0) {
      if (h(r) < -tol) throw Error(ErrorCode::Empty, "model set has an infeasible zero row");
      continue;
    }
    const Vector normal = H.row(r).transpose() / scale;
    const double offset = h(r) / scale;
    bool duplicate = false;
    for (std::size_t a = 0; a < candidates.size(); ++a) {
      if ((normals[a] - normal).lpNorm<Eigen::Infinity>() <= 1e-12) {
        duplicate = true;
        if (offset < offsets[a]) {
          candidates[a] = r;
          offsets[a] = offset;
        }
        break;
      }
    }
    if (!duplicate) {
      candidates.push_back(r);
      normals.push_back(normal);
      offsets.push_back(offset);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  const auto feasibility = lp::solve(rows_lp(H, h, candidates, -1));
  if (feasibility.status == lp::Status::Infeasible) {
    throw Error(ErrorCode::Empty, "no model is consistent with the data and the disturbance bound");
  }

  std::vector<int> kept = candidates;
  for (int r : candidates) {
    auto prog = rows_lp(H, h, kept, r);
    for (Eigen::Index j = 0; j < H.cols(); ++j) prog.set_cost(static_cast<int>(j), -H(r, j));
    const auto result = lp::solve(prog);
    if (result.status == lp::Status::Optimal && -result.objective_value <= h(r) + tol * std::max(1.0, std::abs(h(r)))) {
      kept.erase(std::find(kept.begin(), kept.end(), r));
    }
  }
  FeasibleModelSet out = F;
  out.reduced_rows = std::move(kept);
  return out;
}

bool in_convex_hull(const VertexSet& vertices, const Vector& p, double tol) {
  if (vertices.empty()) return false;
  const auto k = static_cast<int>(vertices.size());
  lp::LinearProgram prog;
  prog.add_variables(k, 0.0, lp::kInf);
  lp::SparseRow sum;
  for (int i = 0; i < k; ++i) sum.push_back({i, 1.0});
  prog.add_eq(std::move(sum), 1.0);
  for (Eigen::Index r = 0; r < p.size(); ++r) {
    lp::SparseRow terms;
    for (int i = 0; i < k; ++i) {
      if (vertices[i].size() != p.size()) throw Error(ErrorCode::ShapeMismatch, "hull vertex has wrong size");
      if (vertices[i](r) != 0.0) terms.push_back({i, vertices[i](r)});
    }
    prog.add_le(terms, p(r) + tol);
    prog.add_ge(std::move(terms), p(r) - tol);
  }
  return lp::solve(prog).status == lp::Status::Optimal;
}

void validate_schedules(const TrajectoryData& traj, const VertexSet& vertices, double tol) {
  for (std::size_t t = 0; t < traj.schedules.size(); ++t) {
    if (!in_convex_hull(vertices, traj.schedules[t], tol)) {
      throw Error(ErrorCode::ScheduleOutsideSet, "scheduling sample " + std::to_string(t) + " lies outside the scheduling set");
    }
  }
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, int line) {
  const std::string f = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": invalid number '" + f + "'");
  }
  return v;
}

// Counts leading header columns named <prefix>1, <prefix>2, ... from `start`.
Eigen::Index count_columns(const std::vector<std::string>& header, std::size_t& start, char prefix) {
  Eigen::Index count = 0;
  while (start < header.size() && trim(header[start]) == std::string(1, prefix) + std::to_string(count + 1)) {
    ++count;
    ++start;
  }
  return count;
}

}  // namespace

std::string trajectory_to_csv(const TrajectoryData& traj) {
  traj.validate();
  const Eigen::Index n = traj.state_dim(), m = traj.input_dim(), s = traj.schedule_dim();
  std::string out = "t";
  for (Eigen::Index i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  for (Eigen::Index i = 1; i <= m; ++i) out += ",u" + std::to_string(i);
  for (Eigen::Index i = 1; i <= s; ++i) out += ",p" + std::to_string(i);
  out += '\n';
  for (int t = 0; t <= traj.horizon(); ++t) {
    out += std::to_string(t);
    for (Eigen::Index i = 0; i < n; ++i) out += ',' + format_double(traj.states[t](i));
    const bool last = t == traj.horizon();
    for (Eigen::Index i = 0; i < m; ++i) out += ',' + (last ? std::string() : format_double(traj.inputs[t](i)));
    for (Eigen::Index i = 0; i < s; ++i) out += ',' + (last ? std::string() : format_double(traj.schedules[t](i)));
    out += '\n';
  }
  return out;
}

TrajectoryData trajectory_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "line 1: missing header");
  const auto header = split_fields(line);
  if (header.empty() || trim(header[0]) != "t") throw Error(ErrorCode::ParseError, "line 1: header must start with 't'");
  std::size_t pos = 1;
  const Eigen::Index n = count_columns(header, pos, 'x');
  const Eigen::Index m = count_columns(header, pos, 'u');
  const Eigen::Index s = count_columns(header, pos, 'p');
  if (pos != header.size() || n == 0 || m == 0 || s == 0) {
    throw Error(ErrorCode::ParseError, "line 1: expected header t,x1..xn,u1..um,p1..ps");
  }
  const std::size_t width = header.size();

  TrajectoryData traj;
  bool closed = false;  // final state-only row seen
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != width) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                             " fields, found " + std::to_string(fields.size()));
    }
    const double t = parse_number(fields[0], line_no);
    if (t != static_cast<double>(traj.states.size())) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": time index out of sequence");
    }
    if (closed) {
      throw Error(ErrorCode::LengthMismatch, "line " + std::to_string(line_no) + ": sample after the final state");
    }
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = parse_number(fields[1 + i], line_no);
    traj.states.push_back(std::move(x));
    const bool empty_tail = std::all_of(fields.begin() + 1 + n, fields.end(), [](const std::string& f) { return trim(f).empty(); });
    if (empty_tail) {
      closed = true;
      continue;
    }
    Vector u(m), p(s);
    for (Eigen::Index i = 0; i < m; ++i) u(i) = parse_number(fields[1 + n + i], line_no);
    for (Eigen::Index i = 0; i < s; ++i) p(i) = parse_number(fields[1 + n + m + i], line_no);
    traj.inputs.push_back(std::move(u));
    traj.schedules.push_back(std::move(p));
  }
  if (traj.states.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": no data rows");
  if (!closed) {
    throw Error(ErrorCode::LengthMismatch, "trajectory has " + std::to_string(traj.states.size()) + " states and " +
                                               std::to_string(traj.inputs.size()) + " inputs; the final row must hold the last state only");
  }
  traj.validate();
  return traj;
}

void save_trajectory(const TrajectoryData& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path);
  out << trajectory_to_csv(traj);
}

TrajectoryData load_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return trajectory_from_csv(buf.str());
}

}  // namespace ccrci
