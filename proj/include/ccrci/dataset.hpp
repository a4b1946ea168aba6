#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccrci/linops.hpp"
#include "ccrci/polytope.hpp"

namespace ccrci {

/// One state-input-scheduling trajectory: T+1 states, T inputs, T schedules.
struct TrajectoryData {
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  std::vector<Vector> schedules;

  int horizon() const { return static_cast<int>(inputs.size()); }
  Eigen::Index state_dim() const { return states.empty() ? 0 : states.front().size(); }
  Eigen::Index input_dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
  Eigen::Index schedule_dim() const { return schedules.empty() ? 0 : schedules.front().size(); }

  /// Throws LengthMismatch, ShapeMismatch or NumericalBreakdown (non-finite sample).
  void validate() const;
  /// The first T samples (T+1 states).
  TrajectoryData prefix(int T) const;
};

struct DataMatrices {
  Matrix X_plus;  // n x T, column t is x_{t+1}
  Matrix X_pu;    // (n+m)s x T, column t is [p_t (x) x_t; p_t (x) u_t]
  Eigen::Index n = 0, m = 0, s = 0;

  int horizon() const { return static_cast<int>(X_plus.cols()); }
};

DataMatrices build_data_matrices(const TrajectoryData& traj);

struct ExcitationReport {
  Eigen::Index data_rank = 0;
  Eigen::Index required_rank = 0;
  Eigen::Index noise_rank = 0;
  Eigen::Index state_dim = 0;
  bool ok() const { return data_rank == required_rank && noise_rank == state_dim; }
};

ExcitationReport excitation_report(const DataMatrices& D, const Matrix& H_w, double tol = 1e-9);
inline bool excitation_check(const DataMatrices& D, const Matrix& H_w, double tol = 1e-9) {
  return excitation_report(D, H_w, tol).ok();
}

/// Disturbance set written as -h_w <= H_w w <= h_w.
struct SymmetricSet {
  Matrix H;
  Vector h;
};

/// Pairs every row of W with its negation. Throws AsymmetricDisturbanceSet
/// when some row has no mirrored partner with the same offset.
SymmetricSet symmetric_form(const Polytope& W, double tol = 1e-12);

/// {vec(M) : H_bar vec(M) <= h_bar}, the models consistent with the data.
struct FeasibleModelSet {
  Matrix H_bar;
  Vector h_bar;
  /// Rows kept after redundancy reduction, ascending; empty optional means all.
  std::optional<std::vector<int>> reduced_rows;
  SymmetricSet noise;
  Eigen::Index n = 0, m = 0, s = 0;
  int T = 0;

  Eigen::Index num_params() const { return H_bar.cols(); }
  /// Rows currently in use (all rows, or the reduced subset).
  std::vector<int> active_rows() const;
  Matrix active_H() const;
  Vector active_h() const;
  /// Largest entry of H_bar vec(M) - h_bar over all rows (not only active ones).
  double violation(const Vector& vec_m) const;
};

FeasibleModelSet build_feasible_model_set(const DataMatrices& D, const SymmetricSet& W);
FeasibleModelSet build_feasible_model_set(const DataMatrices& D, const Polytope& W);

/// Drops duplicate rows, then removes rows one at a time when an LP over the
/// remaining rows shows them redundant. Throws Empty if the set is empty.
FeasibleModelSet reduce_model_set(const FeasibleModelSet& F, double tol = 1e-9);

/// Throws ScheduleOutsideSet (naming the sample) unless every p_t lies in
/// the convex hull of `vertices`.
void validate_schedules(const TrajectoryData& traj, const VertexSet& vertices, double tol = 1e-9);
bool in_convex_hull(const VertexSet& vertices, const Vector& p, double tol = 1e-9);

/// CSV with header t,x1..xn,u1..um,p1..ps; the last row holds x_T only.
std::string trajectory_to_csv(const TrajectoryData& traj);
TrajectoryData trajectory_from_csv(const std::string& text);
void save_trajectory(const TrajectoryData& traj, const std::string& path);
TrajectoryData load_trajectory(const std::string& path);

}  // namespace ccrci
