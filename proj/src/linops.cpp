#include "ccrci/linops.hpp"

#include <Eigen/SVD>

#include "ccrci/error.hpp"

namespace ccrci {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::DegenerateHull: return "DegenerateHull";
    case ErrorCode::BadComplexity: return "BadComplexity";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NotEntirelySimple: return "NotEntirelySimple";
    case ErrorCode::AsymmetricDisturbanceSet: return "AsymmetricDisturbanceSet";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ScheduleOutsideSet: return "ScheduleOutsideSet";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::PluginUnavailable: return "PluginUnavailable";
    case ErrorCode::EmptyModelSet: return "EmptyModelSet";
    case ErrorCode::StateOutsideSet: return "StateOutsideSet";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SynthesisInfeasible: return "SynthesisInfeasible";
  }
  return "Unknown";
}

namespace linops {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector vec(const Matrix& a) {
  Vector out(a.size());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(k++) = a(i, j);
  }
  return out;
}

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw Error(ErrorCode::ShapeMismatch, "unvec: length does not match rows*cols");
  }
  Matrix out(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = v(k++);
  }
  return out;
}

int numerical_rank(const Matrix& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = tol * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++rank;
  }
  return rank;
}

Vector lpv_regressor(const Vector& p, const Vector& x, const Vector& u) {
  const Eigen::Index s = p.size(), n = x.size(), m = u.size();
  Vector z(s * (n + m));
  for (Eigen::Index j = 0; j < s; ++j) {
    z.segment(j * n, n) = p(j) * x;
    z.segment(s * n + j * m, m) = p(j) * u;
  }
  return z;
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

}  // namespace linops
}  // namespace ccrci
