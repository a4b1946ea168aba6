#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ccrci/linops.hpp"

namespace ccrci {

using VertexSet = std::vector<Vector>;

/// H-representation {x : H x <= h}. Immutable once constructed; the vertex
/// cache is filled only through with_vertices().
class Polytope {
 public:
  Polytope() = default;
  Polytope(Matrix H, Vector h);

  /// {x : |x_i| <= bound_i}.
  static Polytope symmetric_box(const Vector& bound);
  static Polytope box(const Vector& lower, const Vector& upper);
  /// {x : -h <= H x <= h}, stored as [H; -H] x <= [h; h].
  static Polytope symmetric(const Matrix& H, const Vector& h);

  const Matrix& H() const { return H_; }
  const Vector& h() const { return h_; }
  Eigen::Index dim() const { return H_.cols(); }
  Eigen::Index num_rows() const { return H_.rows(); }

  bool contains(const Vector& x, double tol = 1e-8) const;

  /// True when every row has exactly one nonzero entry.
  bool is_axis_aligned() const;

  const std::optional<VertexSet>& cached_vertices() const { return vertices_; }
  /// Copy of this polytope with its vertex list attached.
  Polytope with_vertices(const VertexSet& vertices) const;

 private:
  Matrix H_;
  Vector h_;
  std::optional<VertexSet> vertices_;
};

struct VertexOptions {
  double feas_tol = 1e-8;
  double dedup_tol = 1e-7;
  /// Maximum number of row subsets examined.
  std::uint64_t budget = 20'000'000;
};

/// Throws Error(Empty) or Error(Unbounded) unless P is a nonempty bounded set.
void require_bounded_nonempty(const Polytope& P);

/// Brute force over all n-row subsets with invertible H_I.
VertexSet enumerate_vertices(const Polytope& P, const VertexOptions& opts = {});

/// max over x in P of c'x. Closed form for axis-aligned P.
double support(const Vector& c, const Polytope& P);

/// Row-wise support: entry k is max over x in P of C_k x.
Vector support_vector(const Matrix& C, const Polytope& P);

/// Removes points closer than tol (infinity norm) to an earlier point.
VertexSet dedup_points(const VertexSet& points, double tol = 1e-7);

/// Area of the convex polygon with the given vertices (any order).
double volume_2d(const VertexSet& vertices);

struct VolumeEstimate {
  double value = 0.0;
  bool approximate = false;
};

/// Exact area for n = 2; Monte-Carlo estimate inside the bounding box otherwise.
VolumeEstimate volume(const Polytope& P, std::uint64_t seed = 1, int samples = 200'000);

/// Indices of rows that are redundant in P (dropping the row alone does not
/// change the set), decided by one LP per row.
std::vector<int> redundant_rows(const Polytope& P, double tol = 1e-8);

}  // namespace ccrci
