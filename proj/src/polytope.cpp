#include "ccrci/polytope.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccrci/error.hpp"
#include "ccrci/lp.hpp"
#include "ccrci/random.hpp"
#include "combinations.hpp"

namespace ccrci {

Polytope::Polytope(Matrix H, Vector h) : H_(std::move(H)), h_(std::move(h)) {
  if (H_.rows() != h_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "polytope: H has " + std::to_string(H_.rows()) + " rows but h has " +
                                              std::to_string(h_.size()) + " entries");
  }
  if (!H_.allFinite() || !h_.allFinite()) throw Error(ErrorCode::ShapeMismatch, "polytope: non-finite data");
}

Polytope Polytope::symmetric_box(const Vector& bound) { return box(-bound, bound); }

Polytope Polytope::box(const Vector& lower, const Vector& upper) {
  const Eigen::Index n = lower.size();
  Matrix H(2 * n, n);
  H << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  Vector h(2 * n);
  h << upper, -lower;
  return Polytope(std::move(H), std::move(h));
}

Polytope Polytope::symmetric(const Matrix& H, const Vector& h) {
  Matrix HH(2 * H.rows(), H.cols());
  HH << H, -H;
  Vector hh(2 * h.size());
  hh << h, h;
  return Polytope(std::move(HH), std::move(hh));
}

bool Polytope::contains(const Vector& x, double tol) const {
  if (x.size() != dim()) throw Error(ErrorCode::ShapeMismatch, "contains: dimension mismatch");
  return ((H_ * x - h_).array() <= tol).all();
}

bool Polytope::is_axis_aligned() const {
  for (Eigen::Index r = 0; r < H_.rows(); ++r) {
    if ((H_.row(r).array() != 0.0).count() != 1) return false;
  }
  return true;
}

Polytope Polytope::with_vertices(const VertexSet& vertices) const {
  Polytope copy = *this;
  copy.vertices_ = vertices;
  return copy;
}

namespace {

lp::LinearProgram polytope_lp(const Polytope& P, const Vector& objective, int skip_row = -1) {
  lp::LinearProgram prog;
  const auto n = static_cast<int>(P.dim());
  prog.add_variables(n);
  for (int j = 0; j < n; ++j) prog.set_cost(j, -objective(j));
  for (Eigen::Index r = 0; r < P.num_rows(); ++r) {
    if (r == skip_row) continue;
    lp::SparseRow row;
    for (int j = 0; j < n; ++j) {
      if (P.H()(r, j) != 0.0) row.push_back({j, P.H()(r, j)});
    }
    prog.add_le(std::move(row), P.h()(r));
  }
  return prog;
}

// Per-axis bounds of an axis-aligned polytope.
void axis_bounds(const Polytope& P, Vector& lo, Vector& hi) {
  lo = Vector::Constant(P.dim(), -lp::kInf);
  hi = Vector::Constant(P.dim(), lp::kInf);
  for (Eigen::Index r = 0; r < P.num_rows(); ++r) {
    Eigen::Index j = 0;
    P.H().row(r).cwiseAbs().maxCoeff(&j);
    const double a = P.H()(r, j);
    if (a > 0.0) hi(j) = std::min(hi(j), P.h()(r) / a);
    else lo(j) = std::max(lo(j), P.h()(r) / a);
  }
}

}  // namespace

double support(const Vector& c, const Polytope& P) {
  if (c.size() != P.dim()) throw Error(ErrorCode::ShapeMismatch, "support: dimension mismatch");
  if (P.is_axis_aligned()) {
    Vector lo, hi;
    axis_bounds(P, lo, hi);
    if ((lo.array() > hi.array()).any()) throw Error(ErrorCode::Empty, "support: empty box");
    double value = 0.0;
    for (Eigen::Index j = 0; j < c.size(); ++j) {
      if (c(j) == 0.0) continue;
      const double b = c(j) > 0.0 ? hi(j) : lo(j);
      if (!std::isfinite(b)) throw Error(ErrorCode::Unbounded, "support: box unbounded along axis");
      value += c(j) * b;
    }
    return value;
  }
  const auto result = lp::solve(polytope_lp(P, c));
  switch (result.status) {
    case lp::Status::Optimal: return -result.objective_value;
    case lp::Status::Unbounded: throw Error(ErrorCode::Unbounded, "support: unbounded direction");
    case lp::Status::Infeasible: throw Error(ErrorCode::Empty, "support: empty polytope");
    case lp::Status::IterationLimit: break;
  }
  throw Error(ErrorCode::NumericalBreakdown, "support: iteration limit");
}

Vector support_vector(const Matrix& C, const Polytope& P) {
  Vector d(C.rows());
  for (Eigen::Index k = 0; k < C.rows(); ++k) d(k) = support(C.row(k).transpose(), P);
  return d;
}

void require_bounded_nonempty(const Polytope& P) {
  if (P.dim() == 0) return;
  for (Eigen::Index j = 0; j < P.dim(); ++j) {
    for (const double sgn : {1.0, -1.0}) {
      Vector e = Vector::Zero(P.dim());
      e(j) = sgn;
      (void)support(e, P);
    }
  }
}

VertexSet dedup_points(const VertexSet& points, double tol) {
  VertexSet out;
  for (const auto& p : points) {
    const bool seen = std::any_of(out.begin(), out.end(),
                                  [&](const Vector& q) { return (p - q).lpNorm<Eigen::Infinity>() <= tol; });
    if (!seen) out.push_back(p);
  }
  return out;
}

VertexSet enumerate_vertices(const Polytope& P, const VertexOptions& opts) {
  require_bounded_nonempty(P);
  const int n = static_cast<int>(P.dim());
  const int m = static_cast<int>(P.num_rows());
  if (detail::binomial(m, n) > opts.budget) {
    throw Error(ErrorCode::DimensionTooLarge,
                "vertex enumeration over C(" + std::to_string(m) + ", " + std::to_string(n) + ") subsets exceeds budget");
  }
  Vector row_scale(m);
  for (int r = 0; r < m; ++r) row_scale(r) = std::max(1.0, P.H().row(r).lpNorm<Eigen::Infinity>());

  VertexSet points;
  Matrix HI(n, n);
  Vector hI(n);
  for (detail::Combinations comb(m, n); !comb.done(); comb.next()) {
    const auto& idx = comb.current();
    for (int a = 0; a < n; ++a) {
      HI.row(a) = P.H().row(idx[a]);
      hI(a) = P.h()(idx[a]);
    }
    Eigen::FullPivLU<Matrix> lu(HI);
    if (lu.rank() < n || lu.rcond() < 1e-12) continue;
    const Vector v = lu.solve(hI);
    const Vector slack = P.H() * v - P.h();
    if ((slack.array() <= opts.feas_tol * row_scale.array()).all()) points.push_back(v);
  }
  VertexSet vertices = dedup_points(points, opts.dedup_tol);
  if (vertices.empty()) throw Error(ErrorCode::Empty, "vertex enumeration found no vertex");
  return vertices;
}

double volume_2d(const VertexSet& vertices) {
  if (vertices.size() < 3) throw Error(ErrorCode::DegenerateHull, "volume_2d needs at least three points");
  Vector centroid = Vector::Zero(2);
  for (const auto& v : vertices) {
    if (v.size() != 2) throw Error(ErrorCode::ShapeMismatch, "volume_2d expects planar points");
    centroid += v;
  }
  centroid /= static_cast<double>(vertices.size());
  std::vector<std::size_t> order(vertices.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> angle(vertices.size());
  double extent = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vector d = vertices[i] - centroid;
    angle[i] = std::atan2(d(1), d(0));
    extent = std::max(extent, d.norm());
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return angle[a] < angle[b]; });
  double twice_area = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Vector& p = vertices[order[k]];
    const Vector& q = vertices[order[(k + 1) % order.size()]];
    twice_area += p(0) * q(1) - q(0) * p(1);
  }
  const double area = std::abs(twice_area) / 2.0;
  if (area <= 1e-12 * std::max(1.0, extent * extent)) {
    throw Error(ErrorCode::DegenerateHull, "points are collinear");
  }
  return area;
}

VolumeEstimate volume(const Polytope& P, std::uint64_t seed, int samples) {
  if (P.dim() == 2) return {volume_2d(enumerate_vertices(P)), false};
  const Eigen::Index n = P.dim();
  Vector lo(n), hi(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector e = Vector::Zero(n);
    e(j) = 1.0;
    hi(j) = support(e, P);
    lo(j) = -support(-e, P);
  }
  Rng rng(seed);
  long hits = 0;
  for (int k = 0; k < samples; ++k) {
    if (P.contains(rng.uniform_vector(lo, hi), 0.0)) ++hits;
  }
  const double box = (hi - lo).prod();
  return {box * static_cast<double>(hits) / samples, true};
}

std::vector<int> redundant_rows(const Polytope& P, double tol) {
  std::vector<int> out;
  for (Eigen::Index r = 0; r < P.num_rows(); ++r) {
    const auto result = lp::solve(polytope_lp(P, P.H().row(r).transpose(), static_cast<int>(r)));
    if (result.status == lp::Status::Optimal && -result.objective_value <= P.h()(r) + tol) {
      out.push_back(static_cast<int>(r));
    }
  }
  return out;
}

}  // namespace ccrci
