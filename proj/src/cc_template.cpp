#include "ccrci/cc_template.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "ccrci/error.hpp"
#include "combinations.hpp"

namespace ccrci {

namespace {

constexpr double kMaxCondition = 1e10;

Matrix rows_of(const Matrix& C, const IndexSet& I) {
  Matrix out(static_cast<Eigen::Index>(I.size()), C.cols());
  for (std::size_t a = 0; a < I.size(); ++a) out.row(static_cast<Eigen::Index>(a)) = C.row(I[a]);
  return out;
}

void check_shapes(const Matrix& C, const Vector& sigma) {
  if (C.rows() != sigma.size()) throw Error(ErrorCode::ShapeMismatch, "template: C and sigma row counts differ");
  if (C.cols() == 0 || C.rows() < C.cols() + 1) throw Error(ErrorCode::BadComplexity, "template has too few rows");
}

// Rows that are tight (within tol) at each vertex of S(sigma).
std::vector<std::vector<int>> tight_sets(const Matrix& C, const Vector& sigma, double tol) {
  const Polytope S(C, sigma);
  VertexOptions vo;
  vo.feas_tol = tol;
  std::vector<std::vector<int>> out;
  for (const auto& v : enumerate_vertices(S, vo)) {
    const Vector slack = sigma - C * v;
    std::vector<int> tight;
    for (Eigen::Index k = 0; k < C.rows(); ++k) {
      if (std::abs(slack(k)) <= tol * std::max(1.0, std::abs(sigma(k)))) tight.push_back(static_cast<int>(k));
    }
    out.push_back(std::move(tight));
  }
  return out;
}

}  // namespace

Matrix build_circular_template(int n_c) {
  if (n_c < 3) throw Error(ErrorCode::BadComplexity, "circular template needs n_c >= 3");
  Matrix C(n_c, 2);
  for (int i = 0; i < n_c; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / n_c;
    C(i, 0) = std::cos(angle);
    C(i, 1) = std::sin(angle);
  }
  // Exact zeros where the angle lands on an axis.
  C = C.unaryExpr([](double v) { return std::abs(v) < 1e-15 ? 0.0 : v; });
  return C;
}

std::vector<IndexSet> find_vertex_index_sets(const Matrix& C, const Vector& sigma, double tol) {
  check_shapes(C, sigma);
  require_bounded_nonempty(Polytope(C, sigma));
  const int n = static_cast<int>(C.cols());
  std::vector<IndexSet> sets;
  for (detail::Combinations comb(static_cast<int>(C.rows()), n); !comb.done(); comb.next()) {
    const IndexSet& I = comb.current();
    const Matrix CI = rows_of(C, I);
    Eigen::FullPivLU<Matrix> lu(CI);
    if (lu.rank() < n || lu.rcond() < 1e-12) continue;
    Vector sI(n);
    for (int a = 0; a < n; ++a) sI(a) = sigma(I[a]);
    const Vector x = lu.solve(sI);
    const Vector excess = C * x - sigma;
    bool inside = true;
    for (Eigen::Index k = 0; k < C.rows() && inside; ++k) {
      inside = excess(k) <= tol * std::max(1.0, std::abs(sigma(k)));
    }
    if (inside) sets.push_back(I);
  }
  return sets;
}

bool check_entirely_simple(const Matrix& C, const Vector& sigma, const SimplicityOptions& opts) {
  check_shapes(C, sigma);
  const int n = static_cast<int>(C.cols());
  const int n_c = static_cast<int>(C.rows());
  int max_size = opts.max_subset_size == 0 ? n + 2 : opts.max_subset_size;
  if (max_size < 0 || max_size > n_c) max_size = n_c;

  std::uint64_t count = 0;
  for (int s = 1; s <= max_size; ++s) {
    const std::uint64_t c = detail::binomial(n_c, s);
    if (c > opts.budget || count > opts.budget - c) {
      throw Error(ErrorCode::BudgetExceeded, "entirely-simple check exceeds the subset budget");
    }
    count += c;
  }

  // A face of a bounded polytope is nonempty exactly when it contains a
  // vertex, i.e. when I is contained in the tight set of some vertex.
  const auto tight = tight_sets(C, sigma, opts.tol);
  auto face_nonempty = [&](const IndexSet& I) {
    return std::any_of(tight.begin(), tight.end(), [&](const std::vector<int>& T) {
      return std::includes(T.begin(), T.end(), I.begin(), I.end());
    });
  };
  for (int s = 1; s <= max_size; ++s) {
    for (detail::Combinations comb(n_c, s); !comb.done(); comb.next()) {
      const IndexSet& I = comb.current();
      if (!face_nonempty(I)) continue;
      if (s > n || linops::numerical_rank(rows_of(C, I)) < s) return false;
    }
  }
  return true;
}

CCTemplate build_cc_machinery(const Matrix& C, const Vector& sigma, const SimplicityOptions& opts) {
  if (!check_entirely_simple(C, sigma, opts)) {
    throw Error(ErrorCode::NotEntirelySimple, "S(sigma) is not entirely simple for this template");
  }
  CCTemplate t;
  t.C = C;
  t.sigma = sigma;
  t.vertex_index_sets = find_vertex_index_sets(C, sigma, opts.tol);
  const Eigen::Index n = C.cols();
  const Eigen::Index n_c = C.rows();
  const auto v_s = static_cast<Eigen::Index>(t.vertex_index_sets.size());
  t.E.resize(n_c * v_s, n_c);
  for (Eigen::Index k = 0; k < v_s; ++k) {
    const IndexSet& I = t.vertex_index_sets[k];
    const Matrix CI = rows_of(C, I);
    Eigen::JacobiSVD<Matrix> svd(CI);
    const auto& s = svd.singularValues();
    if (s(n - 1) <= 0.0 || s(0) / s(n - 1) > kMaxCondition) {
      throw Error(ErrorCode::NumericalBreakdown, "template facet subset is ill-conditioned");
    }
    const Matrix inv = CI.fullPivLu().inverse();
    Matrix V = Matrix::Zero(n, n_c);
    for (Eigen::Index a = 0; a < n; ++a) V.col(I[a]) = inv.col(a);
    t.E.middleRows(k * n_c, n_c) = C * V - Matrix::Identity(n_c, n_c);
    t.V_maps.push_back(std::move(V));
  }
  const double violation = t.configuration_violation(sigma);
  if (violation > 1e-9 * std::max(1.0, sigma.lpNorm<Eigen::Infinity>())) {
    throw Error(ErrorCode::NumericalBreakdown, "template offset violates its own configuration constraints");
  }
  return t;
}

VertexSet CCTemplate::vertices(const Vector& q) const {
  if (q.size() != C.rows()) throw Error(ErrorCode::ShapeMismatch, "vertices: q has wrong length");
  VertexSet out;
  out.reserve(V_maps.size());
  for (const auto& V : V_maps) out.push_back(V * q);
  return out;
}

double CCTemplate::configuration_violation(const Vector& q) const {
  if (q.size() != C.rows()) throw Error(ErrorCode::ShapeMismatch, "configuration: q has wrong length");
  if (E.rows() == 0) return 0.0;
  return (E * q).maxCoeff();
}

}  // namespace ccrci
