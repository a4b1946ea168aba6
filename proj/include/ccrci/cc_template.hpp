#pragma once

#include <cstdint>
#include <vector>

#include "ccrci/linops.hpp"
#include "ccrci/polytope.hpp"

namespace ccrci {

using IndexSet = std::vector<int>;

/// Facet normals of a configuration-constrained polytope family
/// S(q) = {x : C x <= q} together with the maps that send a configuration q
/// to the vertices of S(q).
struct CCTemplate {
  Matrix C;
  Vector sigma;
  /// Lexicographically sorted, zero-based row indices; one set per vertex.
  std::vector<IndexSet> vertex_index_sets;
  /// V_maps[k] * q is the k-th vertex of S(q) whenever E q <= 0.
  std::vector<Matrix> V_maps;
  /// Stacked blocks C V^k - I, one per vertex.
  Matrix E;

  Eigen::Index dim() const { return C.cols(); }
  Eigen::Index num_facets() const { return C.rows(); }
  Eigen::Index num_vertices() const { return static_cast<Eigen::Index>(V_maps.size()); }

  VertexSet vertices(const Vector& q) const;
  Polytope polytope(const Vector& q) const { return Polytope(C, q); }
  /// Largest entry of E q; nonpositive when q lies in the configuration cone.
  double configuration_violation(const Vector& q) const;
};

/// Rows [cos(2 pi i / n_c), sin(2 pi i / n_c)], i = 0..n_c-1.
Matrix build_circular_template(int n_c);

/// All n-row subsets I with C_I invertible whose face of S(sigma) is nonempty.
std::vector<IndexSet> find_vertex_index_sets(const Matrix& C, const Vector& sigma, double tol = 1e-8);

struct SimplicityOptions {
  double tol = 1e-8;
  /// Largest subset size examined; 0 selects n + 2, a negative value every size.
  int max_subset_size = 0;
  std::uint64_t budget = 50'000'000;
};

bool check_entirely_simple(const Matrix& C, const Vector& sigma, const SimplicityOptions& opts = {});

/// Throws NotEntirelySimple if the check fails and NumericalBreakdown if some
/// C_I has condition number above 1e10.
CCTemplate build_cc_machinery(const Matrix& C, const Vector& sigma, const SimplicityOptions& opts = {});

}  // namespace ccrci
