#include "odeng/covariance.hpp"

#include "odeng/error.hpp"

#include <cmath>
#include <sstream>

namespace odeng {

namespace {

CorrelationSpec with_default_scale(const CorrelationSpec& corr, std::size_t n) {
  CorrelationSpec out = corr;
  if (!out.scale) out.scale = static_cast<double>(n);
  return out;
}

void require_square(const Matrix& m, Eigen::Index size, const char* what) {
  if (m.rows() != size || m.cols() != size) {
    std::ostringstream msg;
    msg << what << " must be " << size << " x " << size << ", got " << m.rows() << " x "
        << m.cols();
    throw ValidationError(msg.str());
  }
}

}  // namespace

Matrix design_matrix(std::span<const double> points, const ModelSpec& model,
                     const NoiseSpec& noise, const Vector& beta0) {
  Matrix x(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(model.p));
  for (std::size_t j = 0; j < points.size(); ++j) {
    x.row(static_cast<Eigen::Index>(j)) = regression_vector(model, noise, points[j], beta0);
  }
  return x;
}

Matrix design_matrix(const ExactDesign& design, const ModelSpec& model, const NoiseSpec& noise,
                     const Vector& beta0) {
  return design_matrix(design.points(), model, noise, beta0);
}

Matrix standardized_error_covariance(std::span<const double> points, double sigma2,
                                     const CorrelationSpec& corr) {
  const CorrelationSpec c = with_default_scale(corr, points.size());
  const auto n = static_cast<Eigen::Index>(points.size());
  Matrix v(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    v(j, j) = sigma2;
    for (Eigen::Index s = 0; s < j; ++s) {
      const double r = r_scaled(c, points[static_cast<std::size_t>(j)] -
                                       points[static_cast<std::size_t>(s)]);
      v(j, s) = v(s, j) = sigma2 * c.gamma * r;
    }
  }
  return v;
}

Matrix error_covariance(std::span<const double> points, const NoiseSpec& noise,
                        const CorrelationSpec& corr) {
  Matrix v = standardized_error_covariance(points, noise.sigma2, corr);
  Vector h(v.rows());
  for (Eigen::Index j = 0; j < h.size(); ++j) h(j) = noise.h(points[static_cast<std::size_t>(j)]);
  return h.asDiagonal() * v * h.asDiagonal();
}

Matrix error_covariance(const ExactDesign& design, const NoiseSpec& noise,
                        const CorrelationSpec& corr) {
  return error_covariance(design.points(), noise, corr);
}

Estimate ols_covariance(const Matrix& x, const Matrix& veps, const Matrix& vp) {
  require_square(veps, x.rows(), "V_eps");
  require_square(vp, x.cols(), "V_p");
  const SpdInverse inv = spd_inverse(x.transpose() * x, "X^T X");
  const Matrix a = inv.inverse * x.transpose();
  Matrix cov = a * veps * a.transpose() + vp;
  cov = 0.5 * (cov + cov.transpose());
  return {cov, inv.condition};
}

Estimate wls_covariance(const Matrix& x, const Matrix& veps, const Matrix& vp) {
  require_square(veps, x.rows(), "V_eps");
  require_square(vp, x.cols(), "V_p");
  const Matrix s = veps + x * vp * x.transpose();
  const SpdInverse s_inv = spd_inverse(s, "V_eps + X V_p X^T");
  const SpdInverse info = spd_inverse(x.transpose() * s_inv.inverse * x, "X^T S^-1 X");
  return {info.inverse, std::max(s_inv.condition, info.condition)};
}

double criterion_value(const Matrix& m, const Criterion& crit) {
  if (crit.type == CriterionType::D) return m.determinant();
  if (!crit.c) throw ValidationError("criterion requires a c-vector", "criterion.c");
  if (crit.c->size() != m.rows()) {
    throw ValidationError("c-vector length does not match the matrix", "criterion.c");
  }
  return crit.c->dot(m * *crit.c);
}

Criterion resolve_criterion(const PopulationProblem& problem) {
  Criterion out = problem.crit;
  out.c = problem.c_vector();
  return out;
}

Estimate design_covariance(const PopulationProblem& problem, std::span<const double> points,
                           Estimator estimator) {
  const Matrix x = design_matrix(points, problem.model, problem.noise, problem.pop.beta0);
  const Matrix veps = standardized_error_covariance(points, problem.noise.sigma2, problem.corr);
  return estimator == Estimator::ols ? ols_covariance(x, veps, problem.pop.vp)
                                     : wls_covariance(x, veps, problem.pop.vp);
}

Estimate design_covariance(const PopulationProblem& problem, const ExactDesign& design,
                           Estimator estimator) {
  return design_covariance(problem, std::span<const double>(design.points()), estimator);
}

double design_criterion(const PopulationProblem& problem, std::span<const double> points,
                        Estimator estimator) {
  return criterion_value(design_covariance(problem, points, estimator).cov,
                         resolve_criterion(problem));
}

double design_criterion(const PopulationProblem& problem, const ExactDesign& design,
                        Estimator estimator) {
  return design_criterion(problem, std::span<const double>(design.points()), estimator);
}

double efficiency_from_values(double value, double reference, CriterionType type, std::size_t p) {
  if (!(value > 0.0) || !(reference > 0.0)) {
    std::ostringstream msg;
    msg << "efficiency needs positive criterion values, got " << value << " and " << reference;
    throw NumericalError(msg.str());
  }
  const double ratio = reference / value;
  return type == CriterionType::D ? std::pow(ratio, 1.0 / static_cast<double>(p)) : ratio;
}

double efficiency(const ExactDesign& design, const ExactDesign& reference,
                  const PopulationProblem& problem, Estimator estimator) {
  return efficiency_from_values(design_criterion(problem, design, estimator),
                                design_criterion(problem, reference, estimator),
                                problem.crit.type, problem.p());
}

}  // namespace odeng
