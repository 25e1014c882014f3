#include "odeng/model.hpp"

#include "odeng/error.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace odeng {

namespace {

void require_size(const Vector& b, std::size_t p, const std::string& name) {
  if (static_cast<std::size_t>(b.size()) != p) {
    throw DomainError(name + " expects " + std::to_string(p) + " parameters, got " +
                      std::to_string(b.size()));
  }
}

ModelSpec linear_model(std::string name, std::vector<std::function<double(double)>> basis) {
  ModelSpec m;
  m.name = std::move(name);
  m.p = basis.size();
  m.kind = ModelKind::linear_basis;
  m.linear_basis = basis;
  const auto shared = std::make_shared<const std::vector<std::function<double(double)>>>(basis);
  const std::string label = m.name;
  const std::size_t p = m.p;
  m.eta = [shared, label, p](double t, const Vector& b) {
    require_size(b, p, label);
    double sum = 0.0;
    for (std::size_t k = 0; k < p; ++k) sum += b(static_cast<Eigen::Index>(k)) * (*shared)[k](t);
    return sum;
  };
  m.grad = [shared, label, p](double t, const Vector& b) {
    require_size(b, p, label);
    Vector g(static_cast<Eigen::Index>(p));
    for (std::size_t k = 0; k < p; ++k) g(static_cast<Eigen::Index>(k)) = (*shared)[k](t);
    return g;
  };
  m.check_params = [label, p](const Vector& b) { require_size(b, p, label); };
  return m;
}

ModelSpec polynomial_model(std::string name, int degree) {
  std::vector<std::function<double(double)>> basis;
  for (int k = 0; k <= degree; ++k) {
    basis.emplace_back([k](double t) { return std::pow(t, k); });
  }
  ModelSpec m = linear_model(std::move(name), std::move(basis));
  m.degree = degree;
  return m;
}

// eta = b1 exp(-b2 t)
ModelSpec exp_elimination() {
  ModelSpec m;
  m.name = "exp-elimination";
  m.p = 2;
  m.kind = ModelKind::nonlinear_builtin;
  m.check_params = [](const Vector& b) { require_size(b, 2, "exp-elimination"); };
  m.eta = [](double t, const Vector& b) { return b(0) * std::exp(-b(1) * t); };
  m.grad = [](double t, const Vector& b) {
    const double e = std::exp(-b(1) * t);
    Vector g(2);
    g << e, -b(0) * t * e;
    return g;
  };
  m.auc = [](const Vector& b) { return b(0) / b(1); };
  m.auc_grad = [](const Vector& b) {
    Vector g(2);
    g << 1.0 / b(1), -b(0) / (b(1) * b(1));
    return g;
  };
  return m;
}

// eta = b3 (exp(-b1 t) - exp(-b2 t))
ModelSpec bateman3() {
  ModelSpec m;
  m.name = "bateman3";
  m.p = 3;
  m.kind = ModelKind::nonlinear_builtin;
  m.check_params = [](const Vector& b) { require_size(b, 3, "bateman3"); };
  m.eta = [](double t, const Vector& b) {
    return b(2) * (std::exp(-b(0) * t) - std::exp(-b(1) * t));
  };
  m.grad = [](double t, const Vector& b) {
    const double e1 = std::exp(-b(0) * t);
    const double e2 = std::exp(-b(1) * t);
    Vector g(3);
    g << -b(2) * t * e1, b(2) * t * e2, e1 - e2;
    return g;
  };
  m.auc = [](const Vector& b) { return b(2) * (1.0 / b(0) - 1.0 / b(1)); };
  m.auc_grad = [](const Vector& b) {
    Vector g(3);
    g << -b(2) / (b(0) * b(0)), b(2) / (b(1) * b(1)), 1.0 / b(0) - 1.0 / b(1);
    return g;
  };
  return m;
}

// eta = b1 / (b1 - b2) (exp(-b2 t) - exp(-b1 t)), one compartment with
// first-order absorption. Singular on the diagonal b1 == b2.
ModelSpec compartmental_fo() {
  ModelSpec m;
  m.name = "compartmental-fo";
  m.p = 2;
  m.kind = ModelKind::nonlinear_builtin;
  auto check = [](const Vector& b) {
    require_size(b, 2, "compartmental-fo");
    const double gap = std::abs(b(0) - b(1));
    if (!(gap >= 1e-6 * std::max(std::abs(b(0)), std::abs(b(1)))) || gap == 0.0) {
      std::ostringstream msg;
      msg << "compartmental-fo requires b1 != b2 (|b1-b2| >= 1e-6 max(|b1|,|b2|)), got b=("
          << b(0) << ", " << b(1) << ")";
      throw DomainError(msg.str());
    }
  };
  m.check_params = check;
  m.eta = [check](double t, const Vector& b) {
    check(b);
    return b(0) / (b(0) - b(1)) * (std::exp(-b(1) * t) - std::exp(-b(0) * t));
  };
  m.grad = [check](double t, const Vector& b) {
    check(b);
    const double b1 = b(0);
    const double b2 = b(1);
    const double e1 = std::exp(-b1 * t);
    const double e2 = std::exp(-b2 * t);
    const double d = (b1 - b2) * (b1 - b2);
    const double s = b1 * b1 * t - b1 * b2 * t;
    Vector g(2);
    g << (b2 * (e1 - e2) + s * e1) / d, -(b1 * (e1 - e2) + s * e2) / d;
    return g;
  };
  m.auc = [](const Vector& b) { return 1.0 / b(1); };
  m.auc_grad = [](const Vector& b) {
    Vector g(2);
    g << 0.0, -1.0 / (b(1) * b(1));
    return g;
  };
  return m;
}

Vector central_difference(const std::function<double(double, const Vector&)>& eta, double t,
                          const Vector& b, double rel_step) {
  Vector g(b.size());
  Vector probe = b;
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    const double step = rel_step * std::max(1.0, std::abs(b(k)));
    probe(k) = b(k) + step;
    const double up = eta(t, probe);
    probe(k) = b(k) - step;
    const double down = eta(t, probe);
    probe(k) = b(k);
    g(k) = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace

void NoiseSpec::validate() const {
  if (!std::isfinite(sigma2) || sigma2 < 0.0) {
    throw ValidationError("must be a finite nonnegative number", "noise.sigma2");
  }
  if (!h) throw ValidationError("heteroscedasticity function missing", "noise.h");
}

NoiseSpec make_noise(double sigma2, std::string_view h_expression) {
  NoiseSpec noise;
  noise.sigma2 = sigma2;
  noise.h_expression = std::string(h_expression);
  const Expression expr = Expression::parse(h_expression, 0);
  const Vector none(0);
  noise.h = [expr, none](double t) { return expr.evaluate(t, none); };
  noise.validate();
  return noise;
}

ModelSpec builtin_model(std::string_view name, std::optional<int> degree) {
  if (name == "constant") {
    return linear_model("constant", {[](double) { return 1.0; }});
  }
  if (name == "quadratic") {
    ModelSpec m = polynomial_model("quadratic", 2);
    return m;
  }
  if (name == "polynomial") {
    const int r = degree.value_or(2);
    if (r < 1) throw ValidationError("polynomial degree must be >= 1", "model.degree");
    return polynomial_model("polynomial", r);
  }
  if (name == "exp-elimination") return exp_elimination();
  if (name == "bateman3") return bateman3();
  if (name == "compartmental-fo") return compartmental_fo();
  throw ValidationError("unknown model '" + std::string(name) + "'", "model.name");
}

Vector finite_difference_gradient(const ModelSpec& model, double t, const Vector& b,
                                  double rel_step) {
  return central_difference(model.eta, t, b, rel_step);
}

ModelSpec parse_model_expression(std::string_view text, std::size_t p,
                                 std::optional<double> probe_t,
                                 const std::optional<Vector>& probe_b) {
  if (p < 1) throw ValidationError("parameter count must be >= 1", "model.p");
  const Expression expr = Expression::parse(text, p);
  ModelSpec m;
  m.name = "expression";
  m.p = p;
  m.kind = ModelKind::parsed_expression;
  m.expression = std::string(text);
  m.check_params = [p](const Vector& b) { require_size(b, p, "expression model"); };
  m.eta = [expr, p](double t, const Vector& b) {
    require_size(b, p, "expression model");
    return expr.evaluate(t, b);
  };
  const auto eta = m.eta;
  m.grad = [eta, p](double t, const Vector& b) {
    require_size(b, p, "expression model");
    return central_difference(eta, t, b, 1e-6);
  };

  const double t0 = probe_t.value_or(1.0);
  const Vector b0 = probe_b.value_or(Vector::Ones(static_cast<Eigen::Index>(p)));
  const double value = m.eta(t0, b0);
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "expression '" << text << "' is not finite at probe point t=" << t0;
    throw ValidationError(msg.str(), "model.expression");
  }
  return m;
}

Vector regression_vector(const ModelSpec& model, const NoiseSpec& noise, double t,
                         const Vector& beta0) {
  const double h = noise.h(t);
  if (!(h > 0.0) || !std::isfinite(h)) {
    std::ostringstream msg;
    msg << "heteroscedasticity factor h(" << t << ") = " << h << " must be positive";
    throw DomainError(msg.str());
  }
  return model.grad(t, beta0) / h;
}

Vector auc_gradient(const ModelSpec& model, const Vector& beta0) {
  if (!model.has_auc()) {
    throw UnsupportedCriterionError("model '" + model.name + "' has no AUC formula",
                                    "criterion.type");
  }
  if (model.check_params) model.check_params(beta0);
  if (model.auc_grad) return model.auc_grad(beta0);
  Vector g(beta0.size());
  Vector probe = beta0;
  for (Eigen::Index k = 0; k < beta0.size(); ++k) {
    const double step = 1e-6 * std::max(1.0, std::abs(beta0(k)));
    probe(k) = beta0(k) + step;
    const double up = model.auc(probe);
    probe(k) = beta0(k) - step;
    const double down = model.auc(probe);
    probe(k) = beta0(k);
    g(k) = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace odeng
