#pragma once

#include "odeng/design.hpp"
#include "odeng/linalg.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace odeng {

struct QuadratureSpec {
  int nodes = 201;

  // Throws ValidationError unless nodes is odd and >= 3.
  void validate() const;
};

// Uniform grid on T with composite Simpson weights.
struct SimpsonGrid {
  Vector t;
  Vector w;

  static SimpsonGrid make(const Domain& domain, const QuadratureSpec& quad);
  double integrate(const Vector& values) const { return w.dot(values); }
};

// phi(t) = (p0 + p1 t + ... + pr t^r)_+ / norm on T. The polynomial is held in
// the scaled variable s = (t - mid) / half, which keeps high degrees well
// conditioned on long intervals; raw power-basis coefficients are available
// for output.
class PolyDensity {
 public:
  // Coefficients of powers of t.
  static PolyDensity from_coefficients(const Vector& coeffs, const Domain& domain,
                                       const QuadratureSpec& quad = {});
  // Coefficients of powers of s = (t - mid) / half.
  static PolyDensity from_scaled(const Vector& scaled, const Domain& domain,
                                 const QuadratureSpec& quad = {});
  static PolyDensity uniform(const Domain& domain, const QuadratureSpec& quad = {});

  const Domain& domain() const noexcept { return domain_; }
  const QuadratureSpec& quadrature() const noexcept { return quad_; }
  const SimpsonGrid& grid() const noexcept { return grid_; }
  const Vector& coefficients() const noexcept { return raw_; }
  const Vector& scaled_coefficients() const noexcept { return scaled_; }
  int degree() const noexcept { return static_cast<int>(scaled_.size()) - 1; }
  // Simpson integral of the positive part.
  double norm() const noexcept { return norm_; }

  double polynomial(double t) const;
  double density(double t) const;
  double cdf(double t) const;
  double quantile(double u) const;

  // Density values on the quadrature grid.
  Vector grid_density() const;
  // CDF values on the quadrature grid.
  Vector cdf_table() const;

 private:
  PolyDensity(const Vector& scaled, const Domain& domain, const QuadratureSpec& quad);
  double scaled_variable(double t) const;
  double antiderivative(double s) const;
  // Unnormalized integral of the positive part over [lo, t].
  double positive_mass(double t) const;

  Domain domain_;
  QuadratureSpec quad_;
  SimpsonGrid grid_;
  Vector scaled_;
  Vector raw_;
  Vector scaled_integral_;  // antiderivative coefficients in s
  double norm_ = 0.0;
  // Maximal sub-intervals of T (in t) where the polynomial is positive, with the
  // exact mass of each.
  std::vector<std::pair<double, double>> positive_;
  std::vector<double> mass_before_;
  double exact_mass_ = 0.0;
};

double eval_density(const PolyDensity& phi, double t);
double eval_cdf(const PolyDensity& phi, double t);
double quantile(const PolyDensity& phi, double u);

// F(t_k)^T rows of regression vectors on the density's quadrature grid.
Matrix regression_grid(const SimpsonGrid& grid, const ModelSpec& model, const NoiseSpec& noise,
                       const Vector& beta0);

// W = sum_k w_k phi_k f_k f_k^T.
Matrix moment_matrix_W(const SimpsonGrid& grid, const Vector& phi, const Matrix& f);
Matrix moment_matrix_W(const PolyDensity& phi, const ModelSpec& model, const NoiseSpec& noise,
                       const Vector& beta0);

// R = sum_k w_k phi_k Q(1 / phi_k) f_k f_k^T; nodes with phi <= 1e-12 or
// 1 / phi > 1e12 contribute nothing.
Matrix correlation_matrix_R(const SimpsonGrid& grid, const Vector& phi, const Matrix& f,
                            const CorrelationSpec& corr);
Matrix correlation_matrix_R(const PolyDensity& phi, const ModelSpec& model,
                            const NoiseSpec& noise, const Vector& beta0,
                            const CorrelationSpec& corr);

// Kernel used by the asymptotic functional. Without a scale override this is
// the problem kernel. With correlation.scale = s and a target design size n
// the kernel is rewritten to rho(s / n * t).
CorrelationSpec asymptotic_kernel(const CorrelationSpec& corr, std::optional<std::size_t> n);

// V = sigma2 (W^-1 + 2 gamma W^-1 R W^-1). Singular W is a DegenerateDensityError.
Matrix asymptotic_covariance_V(const Matrix& w, const Matrix& r, double sigma2, double gamma);
Matrix asymptotic_covariance_V(const PolyDensity& phi, const PopulationProblem& problem,
                               std::optional<std::size_t> n = std::nullopt);

enum class QuantileRule { endpoints, interior, upper };

std::string_view rule_name(QuantileRule rule);
QuantileRule parse_rule(std::string_view name);

// Quantile levels of the rule: endpoints (i-1)/(n-1), interior j/(n+1),
// upper i/n.
std::vector<double> rule_levels(std::size_t n, QuantileRule rule);

// Design t_i = Phi^-1(level_i). Coinciding points throw DegenerateDesignError.
ExactDesign design_from_density(const PolyDensity& phi, std::size_t n, QuantileRule rule);

}  // namespace odeng
