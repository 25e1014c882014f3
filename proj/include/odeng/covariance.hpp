#pragma once

#include "odeng/design.hpp"
#include "odeng/linalg.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace odeng {

// Rows f(t_j)^T = regression_vector(model, noise, t_j, beta0).
Matrix design_matrix(std::span<const double> points, const ModelSpec& model,
                     const NoiseSpec& noise, const Vector& beta0);
Matrix design_matrix(const ExactDesign& design, const ModelSpec& model, const NoiseSpec& noise,
                     const Vector& beta0);

// (V_eps)_js = sigma2 h(t_j) h(t_s) (gamma r(t_j - t_s) + (1 - gamma) delta_js) with
// r(dt) = rho(scale |dt|); scale defaults to the number of points.
Matrix error_covariance(std::span<const double> points, const NoiseSpec& noise,
                        const CorrelationSpec& corr);
Matrix error_covariance(const ExactDesign& design, const NoiseSpec& noise,
                        const CorrelationSpec& corr);

// Error covariance of the standardized errors eps / h, i.e. H^-1 V_eps H^-1.
Matrix standardized_error_covariance(std::span<const double> points, double sigma2,
                                     const CorrelationSpec& corr);

struct Estimate {
  Matrix cov;
  double condition = 1.0;  // condition number of the matrix that was inverted

  bool ill_conditioned() const { return condition > kConditionWarning; }
};

// (X^T X)^-1 X^T V_eps X (X^T X)^-1 + V_p.
Estimate ols_covariance(const Matrix& x, const Matrix& veps, const Matrix& vp);

// (X^T (V_eps + X V_p X^T)^-1 X)^-1.
Estimate wls_covariance(const Matrix& x, const Matrix& veps, const Matrix& vp);

// det(M) for D, c^T M c otherwise. Throws ValidationError when a c-type
// criterion carries no vector.
double criterion_value(const Matrix& m, const Criterion& crit);

// Criterion with the c-vector filled in (AUC gradient at beta0 for AUC).
Criterion resolve_criterion(const PopulationProblem& problem);

// Covariance of the estimator of the population mean under the problem. The
// standardized errors eps / h enter together with X = G / h.
Estimate design_covariance(const PopulationProblem& problem, std::span<const double> points,
                           Estimator estimator);
Estimate design_covariance(const PopulationProblem& problem, const ExactDesign& design,
                           Estimator estimator);

double design_criterion(const PopulationProblem& problem, std::span<const double> points,
                        Estimator estimator);
double design_criterion(const PopulationProblem& problem, const ExactDesign& design,
                        Estimator estimator);

// Efficiency of a criterion value relative to a reference value: for D
// (ref / value)^(1/p), otherwise ref / value.
double efficiency_from_values(double value, double reference, CriterionType type, std::size_t p);

double efficiency(const ExactDesign& design, const ExactDesign& reference,
                  const PopulationProblem& problem, Estimator estimator);

// Monte-Carlo estimate of the OLS covariance: K subjects with b_i ~ N(beta0, V_p)
// and eps_i ~ N(0, V_eps) observed through the linearized model G b_i + eps_i.
// Replicate i draws from its own generator seeded by (seed, i), so the result
// does not depend on the thread count.
Matrix simulate_ols_covariance(const PopulationProblem& problem, const ExactDesign& design,
                               std::size_t k, std::uint64_t seed);

}  // namespace odeng
