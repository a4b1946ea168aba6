// Bounded two-phase revised simplex.
//
// Internal form: A x - r = 0 with one logical r_i per row carrying the row
// bounds, so the initial basis is -I. Phase 1 minimizes the sum of bound
// infeasibilities of the basic variables; Phase 2 minimizes c'x. The basis
// is kept as a sparse LU factorization plus a product-form eta file.

#include <Eigen/OrderingMethods>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>

#include "ccrci/error.hpp"
#include "ccrci/lp.hpp"

namespace ccrci::lp {
namespace {

using DenseVec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, AtZero, Fixed };

constexpr double kPivotTol = 1e-9;
constexpr double kRelPivotTol = 1e-7;
constexpr double kPerturbBase = 1e-4;
constexpr double kPerturbMax = 1e-2;
// Phase 1 counts as stalled when the infeasibility sum falls by less than this
// fraction over one window; the bound perturbation is then made stronger.
constexpr long kStallWindow = 2000;
constexpr double kStallProgress = 1e-6;

double round_pow2(double v) { return std::exp2(std::round(std::log2(v))); }

/// Deterministic splitmix64 stream used for bound perturbation.
class Splitmix {
 public:
  explicit Splitmix(std::uint64_t seed) : state_(seed) {}
  double uniform() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

class RevisedSimplex {
 public:
  RevisedSimplex(const LinearProgram& lp, const SolverOptions& opts);
  LPResult run();

 private:
  enum class Outcome { Optimal, Infeasible, Unbounded, IterationLimit };

  void build_columns(const LinearProgram& lp);
  void compute_scaling();
  void apply_perturbation(double magnitude);
  void remove_perturbation();

  void refactor();
  void ftran(DenseVec& v) const;
  void btran(DenseVec& v) const;
  void compute_basic_values();
  double infeasibility(int col) const;
  double max_basic_infeasibility() const;
  double sum_basic_infeasibility() const;

  Outcome iterate();
  void finalize(Outcome outcome, LPResult& result);

  double column_dot(int col, const DenseVec& y) const;
  void scatter_column(int col, DenseVec& out) const;
  void reset_nonbasic_value(int col);
  void clear_rejections() {
    if (rejected_count_ == 0) return;
    std::fill(rejected_.begin(), rejected_.end(), 0);
    rejected_count_ = 0;
  }

  const SolverOptions& opts_;
  int m_ = 0;
  int n_ = 0;
  long iteration_limit_ = 0;
  long iterations_ = 0;

  // Structural columns in CSC (scaled).
  std::vector<int> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;

  std::vector<double> row_scale_, col_scale_;
  std::vector<double> lo_, hi_, cost_;  // working data, size n + m
  std::vector<double> base_lo_, base_hi_;
  bool perturbed_ = false;
  double perturb_magnitude_ = 0.0;
  std::uint64_t perturb_round_ = 0;

  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<int> head_;
  std::vector<int> pos_;

  // Logical columns pivot on their own rows; only the block of structural
  // basic columns against the remaining rows goes through a sparse LU.
  mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<int> bump_rows_;
  std::vector<int> bump_pos_;
  std::vector<int> bump_cols_;
  std::vector<int> logical_pos_;
  mutable DenseVec work_;

  // Entering candidates rejected for a poor pivot since the last basis change.
  std::vector<char> rejected_;
  int rejected_count_ = 0;
  struct Eta {
    int row;
    double pivot;
    std::vector<int> idx;
    std::vector<double> val;
  };
  std::vector<Eta> etas_;
  std::size_t eta_nnz_ = 0;
  bool bland_ = false;
  int degenerate_run_ = 0;
  long degenerate_total_ = 0;
};

RevisedSimplex::RevisedSimplex(const LinearProgram& lp, const SolverOptions& opts) : opts_(opts) {
  lp.validate();
  m_ = lp.num_rows();
  n_ = lp.num_variables();
  iteration_limit_ = opts.iteration_limit > 0 ? opts.iteration_limit : 50L * (m_ + n_) + 1000;
  build_columns(lp);

  lo_.assign(n_ + m_, 0.0);
  hi_.assign(n_ + m_, 0.0);
  cost_.assign(n_ + m_, 0.0);
  for (int j = 0; j < n_; ++j) {
    lo_[j] = lp.lower()[j];
    hi_[j] = lp.upper()[j];
    cost_[j] = lp.cost()[j];
  }
  for (int i = 0; i < m_; ++i) {
    const auto& row = lp.rows()[i];
    lo_[n_ + i] = row.sense == RowSense::LessEqual ? -kInf : row.rhs;
    hi_[n_ + i] = row.sense == RowSense::GreaterEqual ? kInf : row.rhs;
  }

  compute_scaling();
  if (opts_.verbose && !col_val_.empty()) {
    double lo = kInf, hi = 0;
    for (double v : col_val_) { lo = std::min(lo, std::abs(v)); hi = std::max(hi, std::abs(v)); }
    std::cerr << "[simplex] m=" << m_ << " n=" << n_ << " nnz=" << col_val_.size() << " |a| in [" << lo << ", " << hi << "]\n";
  }
  for (int j = 0; j < n_; ++j) {
    lo_[j] /= col_scale_[j];
    hi_[j] /= col_scale_[j];
    cost_[j] *= col_scale_[j];
  }
  for (int i = 0; i < m_; ++i) {
    lo_[n_ + i] *= row_scale_[i];
    hi_[n_ + i] *= row_scale_[i];
  }
  base_lo_ = lo_;
  base_hi_ = hi_;
  if (opts.perturb && m_ > 0) apply_perturbation(kPerturbBase);

  x_.assign(n_ + m_, 0.0);
  state_.assign(n_ + m_, VarState::AtZero);
  head_.resize(m_);
  pos_.assign(n_ + m_, -1);
  for (int j = 0; j < n_; ++j) reset_nonbasic_value(j);
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    pos_[n_ + i] = i;
    state_[n_ + i] = VarState::Basic;
  }
}

void RevisedSimplex::build_columns(const LinearProgram& lp) {
  std::vector<int> count(n_ + 1, 0);
  for (const auto& row : lp.rows()) {
    for (const auto& t : row.terms) ++count[t.var + 1];
  }
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + count[j + 1];
  col_row_.resize(col_start_[n_]);
  col_val_.resize(col_start_[n_]);
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (int i = 0; i < m_; ++i) {
    for (const auto& t : lp.rows()[i].terms) {
      if (t.coef == 0.0) continue;
      col_row_[fill[t.var]] = i;
      col_val_[fill[t.var]] = t.coef;
      ++fill[t.var];
    }
  }
  // Zero coefficients were skipped; compact.
  std::vector<int> start(n_ + 1, 0);
  std::size_t w = 0;
  for (int j = 0; j < n_; ++j) {
    start[j] = static_cast<int>(w);
    for (int k = col_start_[j]; k < fill[j]; ++k) {
      col_row_[w] = col_row_[k];
      col_val_[w] = col_val_[k];
      ++w;
    }
  }
  start[n_] = static_cast<int>(w);
  col_row_.resize(w);
  col_val_.resize(w);
  col_start_ = std::move(start);
}

void RevisedSimplex::compute_scaling() {
  row_scale_.assign(m_, 1.0);
  col_scale_.assign(n_, 1.0);
  if (!opts_.scale || col_val_.empty()) return;

  for (int pass = 0; pass < 6; ++pass) {
    std::vector<double> rmax(m_, 0.0), rmin(m_, kInf);
    for (int j = 0; j < n_; ++j) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        const double v = std::abs(col_val_[k]) * row_scale_[col_row_[k]] * col_scale_[j];
        rmax[col_row_[k]] = std::max(rmax[col_row_[k]], v);
        rmin[col_row_[k]] = std::min(rmin[col_row_[k]], v);
      }
    }
    for (int i = 0; i < m_; ++i) {
      if (rmax[i] > 0.0) row_scale_[i] /= std::sqrt(rmax[i] * rmin[i]);
    }
    for (int j = 0; j < n_; ++j) {
      double cmax = 0.0, cmin = kInf;
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        const double v = std::abs(col_val_[k]) * row_scale_[col_row_[k]] * col_scale_[j];
        cmax = std::max(cmax, v);
        cmin = std::min(cmin, v);
      }
      if (cmax > 0.0) col_scale_[j] /= std::sqrt(cmax * cmin);
    }
  }
  // Equilibrate rows to unit max, then round everything to powers of two so
  // that scaling introduces no rounding error.
  std::vector<double> rmax(m_, 0.0);
  for (int j = 0; j < n_; ++j) {
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      rmax[col_row_[k]] =
          std::max(rmax[col_row_[k]], std::abs(col_val_[k]) * row_scale_[col_row_[k]] * col_scale_[j]);
    }
  }
  for (int i = 0; i < m_; ++i) {
    if (rmax[i] > 0.0) row_scale_[i] /= rmax[i];
    row_scale_[i] = round_pow2(row_scale_[i]);
  }
  for (int j = 0; j < n_; ++j) col_scale_[j] = round_pow2(col_scale_[j]);
  for (int j = 0; j < n_; ++j) {
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      col_val_[k] *= row_scale_[col_row_[k]] * col_scale_[j];
    }
  }
}

void RevisedSimplex::apply_perturbation(double magnitude) {
  Splitmix rng(0x5EEDu + static_cast<std::uint64_t>(m_) * 131u + static_cast<std::uint64_t>(n_) + perturb_round_++);
  for (int j = 0; j < n_ + m_; ++j) {
    lo_[j] = base_lo_[j];
    hi_[j] = base_hi_[j];
    if (std::isfinite(lo_[j])) lo_[j] -= magnitude * (1.0 + std::abs(lo_[j])) * (0.5 + 0.5 * rng.uniform());
    if (std::isfinite(hi_[j])) hi_[j] += magnitude * (1.0 + std::abs(hi_[j])) * (0.5 + 0.5 * rng.uniform());
  }
  perturb_magnitude_ = magnitude;
  perturbed_ = true;
}

void RevisedSimplex::remove_perturbation() {
  lo_ = base_lo_;
  hi_ = base_hi_;
  perturbed_ = false;
  for (int j = 0; j < n_ + m_; ++j) {
    if (state_[j] != VarState::Basic) reset_nonbasic_value(j);
  }
  refactor();
  compute_basic_values();
}

void RevisedSimplex::reset_nonbasic_value(int col) {
  const double lo = lo_[col], hi = hi_[col];
  VarState s = state_[col];
  if (lo == hi) {
    s = VarState::Fixed;
  } else if (s == VarState::AtUpper && std::isfinite(hi)) {
    // keep
  } else if (s == VarState::AtLower && std::isfinite(lo)) {
    // keep
  } else if (std::isfinite(lo)) {
    s = VarState::AtLower;
  } else if (std::isfinite(hi)) {
    s = VarState::AtUpper;
  } else {
    s = VarState::AtZero;
  }
  state_[col] = s;
  switch (s) {
    case VarState::Fixed:
    case VarState::AtLower: x_[col] = lo; break;
    case VarState::AtUpper: x_[col] = hi; break;
    default: x_[col] = 0.0; break;
  }
}

void RevisedSimplex::scatter_column(int col, DenseVec& out) const {
  out.setZero(m_);
  if (col < n_) {
    for (int k = col_start_[col]; k < col_start_[col + 1]; ++k) out(col_row_[k]) = col_val_[k];
  } else {
    out(col - n_) = -1.0;
  }
}

double RevisedSimplex::column_dot(int col, const DenseVec& y) const {
  if (col >= n_) return -y(col - n_);
  double s = 0.0;
  for (int k = col_start_[col]; k < col_start_[col + 1]; ++k) s += col_val_[k] * y(col_row_[k]);
  return s;
}

void RevisedSimplex::refactor() {
  etas_.clear();
  eta_nnz_ = 0;
  if (m_ == 0) return;
  logical_pos_.assign(m_, -1);
  bump_pos_.clear();
  for (int i = 0; i < m_; ++i) {
    if (head_[i] >= n_) logical_pos_[head_[i] - n_] = i;
    else bump_pos_.push_back(i);
  }
  bump_rows_.clear();
  std::vector<int> bump_index(m_, -1);
  for (int r = 0; r < m_; ++r) {
    if (logical_pos_[r] < 0) {
      bump_index[r] = static_cast<int>(bump_rows_.size());
      bump_rows_.push_back(r);
    }
  }
  const int k = static_cast<int>(bump_pos_.size());
  bump_cols_.resize(k);
  for (int t = 0; t < k; ++t) bump_cols_[t] = head_[bump_pos_[t]];
  if (static_cast<int>(bump_rows_.size()) != k) {
    throw Error(ErrorCode::NumericalBreakdown, "basis bookkeeping is inconsistent");
  }
  if (k == 0) return;
  std::vector<Eigen::Triplet<double>> trips;
  for (int t = 0; t < k; ++t) {
    const int col = bump_cols_[t];
    for (int e = col_start_[col]; e < col_start_[col + 1]; ++e) {
      const int b = bump_index[col_row_[e]];
      if (b >= 0) trips.emplace_back(b, t, col_val_[e]);
    }
  }
  SpMat bump(k, k);
  bump.setFromTriplets(trips.begin(), trips.end());
  bump.makeCompressed();
  lu_.analyzePattern(bump);
  lu_.factorize(bump);
  if (lu_.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalBreakdown, "basis factorization failed: " + lu_.lastErrorMessage());
  }
}

// `v` enters indexed by row and leaves indexed by basis position.
void RevisedSimplex::ftran(DenseVec& v) const {
  if (m_ == 0) return;
  const int k = static_cast<int>(bump_pos_.size());
  work_.setZero(m_);
  if (k > 0) {
    DenseVec rhs(k);
    for (int t = 0; t < k; ++t) rhs(t) = v(bump_rows_[t]);
    const DenseVec xs = lu_.solve(rhs);
    for (int t = 0; t < k; ++t) {
      const double val = xs(t);
      work_(bump_pos_[t]) = val;
      if (val == 0.0) continue;
      const int col = bump_cols_[t];
      for (int e = col_start_[col]; e < col_start_[col + 1]; ++e) {
        const int p = logical_pos_[col_row_[e]];
        if (p >= 0) work_(p) += col_val_[e] * val;
      }
    }
  }
  for (int r = 0; r < m_; ++r) {
    const int p = logical_pos_[r];
    if (p >= 0) work_(p) -= v(r);
  }
  v.swap(work_);
  for (const auto& eta : etas_) {
    const double vr = v(eta.row) / eta.pivot;
    v(eta.row) = vr;
    if (vr == 0.0) continue;
    for (std::size_t e = 0; e < eta.idx.size(); ++e) v(eta.idx[e]) -= eta.val[e] * vr;
  }
}

// `v` enters indexed by basis position and leaves indexed by row.
void RevisedSimplex::btran(DenseVec& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double dot = 0.0;
    for (std::size_t e = 0; e < it->idx.size(); ++e) dot += it->val[e] * v(it->idx[e]);
    v(it->row) = (v(it->row) - dot) / it->pivot;
  }
  work_.setZero(m_);
  for (int r = 0; r < m_; ++r) {
    const int p = logical_pos_[r];
    if (p >= 0) work_(r) = -v(p);
  }
  const int k = static_cast<int>(bump_pos_.size());
  if (k > 0) {
    DenseVec rhs(k);
    for (int t = 0; t < k; ++t) {
      const int col = bump_cols_[t];
      double acc = v(bump_pos_[t]);
      for (int e = col_start_[col]; e < col_start_[col + 1]; ++e) {
        if (logical_pos_[col_row_[e]] >= 0) acc -= col_val_[e] * work_(col_row_[e]);
      }
      rhs(t) = acc;
    }
    const DenseVec yr = lu_.transpose().solve(rhs);
    for (int t = 0; t < k; ++t) work_(bump_rows_[t]) = yr(t);
  }
  v.swap(work_);
}

void RevisedSimplex::compute_basic_values() {
  if (m_ == 0) return;
  DenseVec rhs = DenseVec::Zero(m_);
  for (int j = 0; j < n_ + m_; ++j) {
    if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
    if (j >= n_) {
      rhs(j - n_) += x_[j];
    } else {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) rhs(col_row_[k]) -= col_val_[k] * x_[j];
    }
  }
  ftran(rhs);
  for (int i = 0; i < m_; ++i) x_[head_[i]] = rhs(i);
}

double RevisedSimplex::infeasibility(int col) const {
  const double v = x_[col];
  if (v < lo_[col]) return lo_[col] - v;
  if (v > hi_[col]) return v - hi_[col];
  return 0.0;
}

double RevisedSimplex::max_basic_infeasibility() const {
  double worst = 0.0;
  for (int i = 0; i < m_; ++i) worst = std::max(worst, infeasibility(head_[i]));
  return worst;
}

double RevisedSimplex::sum_basic_infeasibility() const {
  double total = 0.0;
  for (int i = 0; i < m_; ++i) total += infeasibility(head_[i]);
  return total;
}

RevisedSimplex::Outcome RevisedSimplex::iterate() {
  const double ftol = opts_.feas_tol;
  const double dtol = opts_.opt_tol;
  DenseVec y(m_), alpha(m_);
  bool verified = false;
  bool accept_small_pivot = false;
  bool fresh_factor = false;
  rejected_.assign(n_ + m_, 0);
  rejected_count_ = 0;
  double window_sum = kInf;
  long window_end = iterations_ + kStallWindow;

  refactor();
  compute_basic_values();

  while (true) {
    if (iterations_ >= iteration_limit_) return Outcome::IterationLimit;
    if (static_cast<int>(etas_.size()) >= opts_.refactor_interval || eta_nnz_ > 20u * static_cast<std::size_t>(m_) + 1000u) {
      refactor();
      compute_basic_values();
    }

    // Phase selection and basic costs.
    bool phase1 = false;
    y.setZero(m_);
    for (int i = 0; i < m_; ++i) {
      const int col = head_[i];
      if (x_[col] < lo_[col] - ftol) {
        y(i) = -1.0;
        phase1 = true;
      } else if (x_[col] > hi_[col] + ftol) {
        y(i) = 1.0;
        phase1 = true;
      }
    }
    if (!phase1) {
      for (int i = 0; i < m_; ++i) y(i) = cost_[head_[i]];
    } else if (iterations_ >= window_end) {
      const double sum = sum_basic_infeasibility();
      if (perturbed_ && perturb_magnitude_ < kPerturbMax && sum > (1.0 - kStallProgress) * window_sum) {
        apply_perturbation(perturb_magnitude_ * 10.0);
        for (int j = 0; j < n_ + m_; ++j) {
          if (state_[j] != VarState::Basic) reset_nonbasic_value(j);
        }
        compute_basic_values();
        if (opts_.verbose) std::cerr << "[simplex] phase 1 stalled; perturbation raised to " << perturb_magnitude_ << '\n';
        window_sum = kInf;
        window_end = iterations_ + kStallWindow;
        continue;
      }
      window_sum = sum;
      window_end = iterations_ + kStallWindow;
    }
    btran(y);

    // Pricing.
    int enter = -1;
    int dir = 0;
    double best = 0.0;
    for (int j = 0; j < n_ + m_; ++j) {
      const VarState s = state_[j];
      if (s == VarState::Basic || s == VarState::Fixed || rejected_[j]) continue;
      const double d = (phase1 ? 0.0 : cost_[j]) - column_dot(j, y);
      int jd = 0;
      if (d < -dtol && (s == VarState::AtLower || s == VarState::AtZero)) jd = 1;
      else if (d > dtol && (s == VarState::AtUpper || s == VarState::AtZero)) jd = -1;
      if (jd == 0) continue;
      if (bland_) {
        enter = j;
        dir = jd;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        enter = j;
        dir = jd;
      }
    }

    if (enter < 0) {
      if (rejected_count_ > 0) {
        clear_rejections();
        accept_small_pivot = true;
        continue;
      }
      if (!verified && !etas_.empty()) {
        // Confirm with a fresh factorization before declaring termination.
        refactor();
        compute_basic_values();
        verified = true;
        continue;
      }
      if (phase1) {
        return max_basic_infeasibility() > ftol ? Outcome::Infeasible : Outcome::Optimal;
      }
      return Outcome::Optimal;
    }
    verified = false;

    scatter_column(enter, alpha);
    ftran(alpha);

    // Ratio test. Basic i moves at rate g_i = -dir * alpha_i per unit step.
    double theta_max = kInf;
    const double flip = (std::isfinite(lo_[enter]) && std::isfinite(hi_[enter])) ? hi_[enter] - lo_[enter] : kInf;
    const auto bound_target = [&](int i, double g, bool relaxed, double& target) -> double {
      const int col = head_[i];
      const double v = x_[col];
      const double tol = relaxed ? ftol : 0.0;
      if (g < 0.0) {
        if (v > hi_[col] + ftol) {  // infeasible above, moving down: block at upper
          target = hi_[col];
          return (v - hi_[col] + tol) / -g;
        }
        if (v < lo_[col] - ftol || !std::isfinite(lo_[col])) return kInf;
        target = lo_[col];
        return (v - lo_[col] + tol) / -g;
      }
      if (v < lo_[col] - ftol) {  // infeasible below, moving up: block at lower
        target = lo_[col];
        return (lo_[col] - v + tol) / g;
      }
      if (v > hi_[col] + ftol || !std::isfinite(hi_[col])) return kInf;
      target = hi_[col];
      return (hi_[col] - v + tol) / g;
    };

    int leave = -1;
    double leave_target = 0.0;
    double theta = kInf;
    double target = 0.0;
    if (bland_) {
      int leave_col = -1;
      for (int i = 0; i < m_; ++i) {
        const double g = -dir * alpha(i);
        if (std::abs(g) <= kPivotTol) continue;
        const double t = std::max(0.0, bound_target(i, g, false, target));
        if (t < theta - 1e-12 || (t <= theta + 1e-12 && leave >= 0 && head_[i] < leave_col)) {
          theta = t;
          leave = i;
          leave_col = head_[i];
          leave_target = target;
        }
      }
    } else {
      for (int i = 0; i < m_; ++i) {
        const double g = -dir * alpha(i);
        if (std::abs(g) <= kPivotTol) continue;
        theta_max = std::min(theta_max, bound_target(i, g, true, target));
      }
      if (std::isfinite(theta_max)) {
        double best_pivot = 0.0;
        for (int i = 0; i < m_; ++i) {
          const double g = -dir * alpha(i);
          if (std::abs(g) <= kPivotTol) continue;
          const double t = bound_target(i, g, false, target);
          if (t <= theta_max && std::abs(g) > best_pivot) {
            best_pivot = std::abs(g);
            leave = i;
            leave_target = target;
            theta = std::max(0.0, t);
          }
        }
      }
    }

    if (std::isfinite(flip) && flip <= theta) {
      // Bound flip of the entering variable; basis unchanged.
      const double step = dir * flip;
      for (int i = 0; i < m_; ++i) x_[head_[i]] -= step * alpha(i);
      if (dir > 0) {
        x_[enter] = hi_[enter];
        state_[enter] = VarState::AtUpper;
      } else {
        x_[enter] = lo_[enter];
        state_[enter] = VarState::AtLower;
      }
      ++iterations_;
      degenerate_run_ = 0;
      bland_ = false;
      continue;
    }
    if (leave < 0) {
      if (phase1) {
        // Cannot happen in exact arithmetic; refresh and retry once.
        if (!etas_.empty()) {
          refactor();
          compute_basic_values();
          continue;
        }
        throw Error(ErrorCode::NumericalBreakdown, "phase-1 ratio test found no blocking variable");
      }
      return Outcome::Unbounded;
    }

    if (!accept_small_pivot && std::abs(alpha(leave)) < kRelPivotTol * alpha.lpNorm<Eigen::Infinity>()) {
      if (!etas_.empty() && !fresh_factor) {
        refactor();
        compute_basic_values();
        fresh_factor = true;
      } else {
        rejected_[enter] = 1;
        ++rejected_count_;
      }
      continue;
    }
    accept_small_pivot = false;
    fresh_factor = false;
    clear_rejections();

    const double step = dir * theta;
    if (theta != 0.0) {
      for (int i = 0; i < m_; ++i) x_[head_[i]] -= step * alpha(i);
    }
    x_[enter] += step;

    const int leave_col = head_[leave];
    x_[leave_col] = leave_target;
    if (lo_[leave_col] == hi_[leave_col]) state_[leave_col] = VarState::Fixed;
    else state_[leave_col] = leave_target == lo_[leave_col] ? VarState::AtLower : VarState::AtUpper;
    pos_[leave_col] = -1;
    head_[leave] = enter;
    pos_[enter] = leave;
    state_[enter] = VarState::Basic;

    Eta eta;
    eta.row = leave;
    eta.pivot = alpha(leave);
    for (int i = 0; i < m_; ++i) {
      if (i != leave && alpha(i) != 0.0) {
        eta.idx.push_back(i);
        eta.val.push_back(alpha(i));
      }
    }
    eta_nnz_ += eta.idx.size() + 1;
    etas_.push_back(std::move(eta));
    ++iterations_;

    if (theta * std::max(1.0, std::abs(alpha(leave))) <= 1e-12) {
      ++degenerate_total_;
      if (++degenerate_run_ >= opts_.degenerate_stall) bland_ = true;
    } else {
      degenerate_run_ = 0;
      bland_ = false;
    }
    if (opts_.verbose && iterations_ % 1000 == 0) {
      std::cerr << "[simplex] it=" << iterations_ << (phase1 ? " phase1" : " phase2")
                << " infeas=" << max_basic_infeasibility() << " sum=" << sum_basic_infeasibility()
                << " degenerate=" << degenerate_total_ << (bland_ ? " bland" : "") << '\n';
    }
  }
}

void RevisedSimplex::finalize(Outcome outcome, LPResult& result) {
  result.iterations = iterations_;
  result.x.assign(n_, 0.0);
  for (int j = 0; j < n_; ++j) result.x[j] = x_[j] * col_scale_[j];
  switch (outcome) {
    case Outcome::Optimal: result.status = Status::Optimal; break;
    case Outcome::Infeasible: result.status = Status::Infeasible; break;
    case Outcome::Unbounded: result.status = Status::Unbounded; break;
    case Outcome::IterationLimit: result.status = Status::IterationLimit; break;
  }
  if (outcome == Outcome::Infeasible) {
    for (int i = 0; i < m_; ++i) {
      const int col = head_[i];
      if (col >= n_ && infeasibility(col) > opts_.feas_tol) result.infeasible_rows.push_back(col - n_);
    }
    std::sort(result.infeasible_rows.begin(), result.infeasible_rows.end());
  }
  if (outcome == Outcome::Optimal) {
    DenseVec y(m_);
    for (int i = 0; i < m_; ++i) y(i) = cost_[head_[i]];
    btran(y);
    result.row_duals.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) result.row_duals[i] = y(i) * row_scale_[i];
    result.reduced_costs.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      const double d = state_[j] == VarState::Basic ? 0.0 : cost_[j] - column_dot(j, y);
      result.reduced_costs[j] = d / col_scale_[j];
    }
  }
}

LPResult RevisedSimplex::run() {
  LPResult result;
  Outcome outcome = iterate();
  if (perturbed_ && (outcome == Outcome::Optimal || outcome == Outcome::Unbounded)) {
    remove_perturbation();
    bland_ = false;
    degenerate_run_ = 0;
    outcome = iterate();
  }
  finalize(outcome, result);
  return result;
}

}  // namespace

LPResult solve(const LinearProgram& lp, const SolverOptions& opts) {
  RevisedSimplex simplex(lp, opts);
  LPResult result = simplex.run();
  if (result.status == Status::Optimal) result.objective_value = lp.objective(result.x);
  return result;
}

}  // namespace ccrci::lp
