#pragma once

#include "odeng/expression.hpp"
#include "odeng/linalg.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace odeng {

enum class ModelKind { linear_basis, nonlinear_builtin, parsed_expression };

// Regression model eta(t, b) with its parameter gradient g(t, b) = d eta / d b.
// Values are immutable after construction and safe to share between threads.
struct ModelSpec {
  std::string name;
  std::size_t p = 0;
  ModelKind kind = ModelKind::linear_basis;

  std::function<double(double, const Vector&)> eta;
  std::function<Vector(double, const Vector&)> grad;

  // Area under eta on [0, inf) and its gradient; empty when the model has no
  // closed form.
  std::function<double(const Vector&)> auc;
  std::function<Vector(const Vector&)> auc_grad;

  // Only for ModelKind::linear_basis: eta(t, b) = sum_k b_k basis[k](t).
  std::vector<std::function<double(double)>> linear_basis;

  // Throws DomainError when b lies outside the valid parameter region.
  std::function<void(const Vector&)> check_params;

  // Source text for parsed-expression models.
  std::string expression;
  // Polynomial degree for the `polynomial` builtin.
  int degree = 0;

  bool has_auc() const { return static_cast<bool>(auc); }
};

// Heteroscedastic error model Var(eps(t)) = sigma2 * h(t)^2.
struct NoiseSpec {
  double sigma2 = 1.0;
  std::function<double(double)> h = [](double) { return 1.0; };
  std::string h_expression = "1";

  // Throws ValidationError when sigma2 is negative or not finite.
  void validate() const;
};

// Builds a noise spec whose h is parsed from an expression in t.
NoiseSpec make_noise(double sigma2, std::string_view h_expression = "1");

// Builtin models: constant, quadratic, polynomial (requires degree >= 1),
// exp-elimination, bateman3, compartmental-fo. Unknown names throw
// ValidationError.
ModelSpec builtin_model(std::string_view name, std::optional<int> degree = std::nullopt);

// Model from an expression over t and b1..bp with a finite-difference gradient
// (central, relative step 1e-6 * max(1, |b_k|)). The expression is probed at
// (probe_t, probe_b); a non-finite value there is a ValidationError. Without a
// probe point the model is probed at t = 1, b = (1, ..., 1).
ModelSpec parse_model_expression(std::string_view text, std::size_t p,
                                 std::optional<double> probe_t = std::nullopt,
                                 const std::optional<Vector>& probe_b = std::nullopt);

// Central finite-difference gradient of eta in b.
Vector finite_difference_gradient(const ModelSpec& model, double t, const Vector& b,
                                  double rel_step = 1e-6);

// f(t) = g(t, beta0) / h(t); the row entering every design matrix.
Vector regression_vector(const ModelSpec& model, const NoiseSpec& noise, double t,
                         const Vector& beta0);

// Gradient of AUC(b) at beta0, used as the c-vector of the AUC criterion.
// Throws UnsupportedCriterionError when the model has no AUC formula.
Vector auc_gradient(const ModelSpec& model, const Vector& beta0);

}  // namespace odeng
