#pragma once

#include <Eigen/Dense>

namespace ccrci {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linops {

/// Kronecker product; block (i, j) of the result is a(i, j) * b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Column-major stacking of the columns of `a`.
Vector vec(const Matrix& a);

/// Inverse of vec for a rows x cols matrix.
Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// Number of singular values above tol * sigma_max. Zero for an all-zero or
/// empty matrix.
int numerical_rank(const Matrix& a, double tol = 1e-9);

/// Regressor [p (x) x; p (x) u] used by the LPV model x+ = M * regressor + w.
Vector lpv_regressor(const Vector& p, const Vector& x, const Vector& u);

bool all_finite(const Matrix& a);

}  // namespace linops
}  // namespace ccrci
