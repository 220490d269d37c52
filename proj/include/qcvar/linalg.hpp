#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace qcvar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

/// Kronecker product a ⊗ b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Column-major vec().
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// M^e for e >= 0 by repeated squaring.
Matrix matrix_power(const Matrix& m, int e);

Matrix block_diag(const Matrix& a, const Matrix& b);

/// Smallest singular value divided by the largest; 0 for an empty or zero matrix.
double inverse_condition(const Matrix& m);

/// Principal square root of a symmetric positive semidefinite matrix.
Matrix spd_sqrt(const Matrix& m);

}  // namespace qcvar
