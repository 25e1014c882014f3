#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace odeng {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Condition numbers above this value are reported as ill-conditioned.
inline constexpr double kConditionWarning = 1e12;

struct SpdInverse {
  Matrix inverse;
  double condition = 1.0;  // estimated 2-norm condition number of the input
};

// Inverts a symmetric positive-definite matrix through a Cholesky factorization.
// Throws SingularDesignError (naming `what`) when the factorization fails or
// the matrix is numerically singular.
SpdInverse spd_inverse(const Matrix& a, std::string_view what);

// Symmetric square root factor L with L L^T = a for a symmetric PSD matrix.
// Negative eigenvalues down to -1e-10 * max(1, |a|) are clipped to zero.
Matrix psd_factor(const Matrix& a);

// Smallest eigenvalue of the symmetric part of a.
double min_eigenvalue(const Matrix& a);

}  // namespace odeng
