#include "odeng/linalg.hpp"

#include "odeng/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace odeng {

namespace {

// Beyond this the Cholesky inverse carries no significant digits.
constexpr double kConditionSingular = 1e15;

}  // namespace

SpdInverse spd_inverse(const Matrix& a, std::string_view what) {
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw SingularDesignError(std::string(what) + ": eigenvalue computation failed");
  }
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(hi > 0.0) || !(condition < kConditionSingular)) {
    std::ostringstream msg;
    msg << what << " is singular (condition number " << condition << ")";
    throw SingularDesignError(msg.str());
  }
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << what << " is not positive definite (condition number " << condition << ")";
    throw SingularDesignError(msg.str());
  }
  SpdInverse out;
  out.inverse = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  out.inverse = 0.5 * (out.inverse + out.inverse.transpose()).eval();
  out.condition = condition;
  return out;
}

Matrix psd_factor(const Matrix& a) {
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Vector values = eig.eigenvalues();
  const double tol = 1e-10 * std::max(1.0, values.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) < -tol) {
      throw DomainError("matrix is not positive semidefinite (eigenvalue " +
                        std::to_string(values(i)) + ")");
    }
    values(i) = std::sqrt(std::max(0.0, values(i)));
  }
  return eig.eigenvectors() * values.asDiagonal();
}

double min_eigenvalue(const Matrix& a) {
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace odeng
