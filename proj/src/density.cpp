#include "odeng/density.hpp"

#include "odeng/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace odeng {

namespace {

constexpr double kDegenerateNorm = 1e-12;
constexpr double kPhiFloor = 1e-12;
constexpr double kQArgumentCap = 1e12;
constexpr int kRootSamples = 4096;

double horner(const Vector& c, double x) {
  double v = 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 0; --k) v = v * x + c(k);
  return v;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Coefficients of q(t) = p((t - mid) / half).
Vector scaled_to_raw(const Vector& a, double mid, double half) {
  const auto m = a.size();
  Vector c = Vector::Zero(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double ak = a(k) / std::pow(half, static_cast<double>(k));
    for (Eigen::Index j = 0; j <= k; ++j) {
      c(j) += ak * binomial(static_cast<int>(k), static_cast<int>(j)) *
              std::pow(-mid, static_cast<double>(k - j));
    }
  }
  return c;
}

// Coefficients of p(s) = q(mid + half s).
Vector raw_to_scaled(const Vector& c, double mid, double half) {
  const auto m = c.size();
  Vector a = Vector::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      a(i) += c(j) * binomial(static_cast<int>(j), static_cast<int>(i)) *
              std::pow(mid, static_cast<double>(j - i)) * std::pow(half, static_cast<double>(i));
    }
  }
  return a;
}

double bisect_root(const Vector& a, double left, double right) {
  double fl = horner(a, left);
  for (int it = 0; it < 200 && right - left > 1e-15; ++it) {
    const double mid = 0.5 * (left + right);
    const double fm = horner(a, mid);
    if ((fm > 0.0) == (fl > 0.0)) {
      left = mid;
      fl = fm;
    } else {
      right = mid;
    }
  }
  return 0.5 * (left + right);
}

}  // namespace

void QuadratureSpec::validate() const {
  if (nodes < 3 || nodes % 2 == 0) {
    throw ValidationError("must be an odd integer >= 3, got " + std::to_string(nodes),
                          "density.quad_nodes");
  }
}

SimpsonGrid SimpsonGrid::make(const Domain& domain, const QuadratureSpec& quad) {
  quad.validate();
  domain.validate();
  const int n = quad.nodes;
  const double h = domain.length() / (n - 1);
  SimpsonGrid g;
  g.t.resize(n);
  g.w.resize(n);
  for (int k = 0; k < n; ++k) {
    g.t(k) = k == n - 1 ? domain.hi : domain.lo + k * h;
    const double weight = (k == 0 || k == n - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    g.w(k) = weight * h / 3.0;
  }
  return g;
}

PolyDensity::PolyDensity(const Vector& scaled, const Domain& domain, const QuadratureSpec& quad)
    : domain_(domain), quad_(quad), grid_(SimpsonGrid::make(domain, quad)), scaled_(scaled) {
  if (scaled_.size() == 0) throw ValidationError("density needs at least one coefficient");
  if (!scaled_.allFinite()) throw ValidationError("density coefficients must be finite");
  const double mid = 0.5 * (domain_.lo + domain_.hi);
  const double half = 0.5 * domain_.length();
  raw_ = scaled_to_raw(scaled_, mid, half);

  Vector positive(grid_.t.size());
  for (Eigen::Index k = 0; k < positive.size(); ++k) {
    positive(k) = std::max(0.0, polynomial(grid_.t(k)));
  }
  norm_ = grid_.integrate(positive);
  if (!(norm_ >= kDegenerateNorm)) {
    std::ostringstream msg;
    msg << "density polynomial has no positive mass on [" << domain_.lo << ", " << domain_.hi
        << "] (norm " << norm_ << ")";
    throw DegenerateDensityError(msg.str());
  }

  scaled_integral_ = Vector::Zero(scaled_.size() + 1);
  for (Eigen::Index k = 0; k < scaled_.size(); ++k) {
    scaled_integral_(k + 1) = scaled_(k) / static_cast<double>(k + 1);
  }

  // Positive intervals in s from sign changes on a fine sample.
  std::vector<std::pair<double, double>> s_intervals;
  double prev_s = -1.0;
  bool prev_pos = horner(scaled_, -1.0) > 0.0;
  double start = -1.0;
  for (int i = 1; i <= kRootSamples; ++i) {
    const double s = i == kRootSamples ? 1.0 : -1.0 + 2.0 * i / kRootSamples;
    const bool pos = horner(scaled_, s) > 0.0;
    if (pos != prev_pos) {
      const double root = bisect_root(scaled_, prev_s, s);
      if (pos) {
        start = root;
      } else {
        s_intervals.emplace_back(start, root);
      }
    }
    prev_s = s;
    prev_pos = pos;
  }
  if (prev_pos) s_intervals.emplace_back(start, 1.0);

  for (const auto& [a, b] : s_intervals) {
    const double ta = std::clamp(mid + half * a, domain_.lo, domain_.hi);
    const double tb = std::clamp(mid + half * b, domain_.lo, domain_.hi);
    const double mass = half * (antiderivative(b) - antiderivative(a));
    if (tb > ta && mass > 0.0) {
      positive_.emplace_back(ta, tb);
      mass_before_.push_back(exact_mass_);
      exact_mass_ += mass;
    }
  }
  if (!(exact_mass_ > 0.0)) {
    throw DegenerateDensityError("density polynomial has no positive mass");
  }
}

PolyDensity PolyDensity::from_coefficients(const Vector& coeffs, const Domain& domain,
                                           const QuadratureSpec& quad) {
  domain.validate();
  return PolyDensity(raw_to_scaled(coeffs, 0.5 * (domain.lo + domain.hi), 0.5 * domain.length()),
                     domain, quad);
}

PolyDensity PolyDensity::from_scaled(const Vector& scaled, const Domain& domain,
                                     const QuadratureSpec& quad) {
  domain.validate();
  return PolyDensity(scaled, domain, quad);
}

PolyDensity PolyDensity::uniform(const Domain& domain, const QuadratureSpec& quad) {
  return from_scaled(Vector::Ones(1), domain, quad);
}

double PolyDensity::scaled_variable(double t) const {
  return (t - 0.5 * (domain_.lo + domain_.hi)) / (0.5 * domain_.length());
}

double PolyDensity::antiderivative(double s) const { return horner(scaled_integral_, s); }

double PolyDensity::polynomial(double t) const { return horner(scaled_, scaled_variable(t)); }

double PolyDensity::density(double t) const {
  if (!domain_.contains(t)) return 0.0;
  return std::max(0.0, polynomial(t)) / norm_;
}

double PolyDensity::positive_mass(double t) const {
  const double half = 0.5 * domain_.length();
  double mass = 0.0;
  for (std::size_t i = 0; i < positive_.size(); ++i) {
    const auto [a, b] = positive_[i];
    if (t <= a) break;
    if (t >= b) {
      mass = i + 1 < mass_before_.size() ? mass_before_[i + 1] : exact_mass_;
      continue;
    }
    return mass_before_[i] +
           half * (antiderivative(scaled_variable(t)) - antiderivative(scaled_variable(a)));
  }
  return mass;
}

double PolyDensity::cdf(double t) const {
  if (t <= domain_.lo) return 0.0;
  if (t >= domain_.hi) return 1.0;
  return std::clamp(positive_mass(t) / exact_mass_, 0.0, 1.0);
}

double PolyDensity::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) {
    std::ostringstream msg;
    msg << "quantile level must lie in [0, 1], got " << u;
    throw DomainError(msg.str());
  }
  if (u == 0.0) return domain_.lo;
  if (u == 1.0) return domain_.hi;
  const double target = u * exact_mass_;
  std::size_t i = 0;
  while (i + 1 < positive_.size() && mass_before_[i + 1] <= target) ++i;
  double left = positive_[i].first;
  double right = positive_[i].second;
  for (int it = 0; it < 200 && right - left > 1e-15 * domain_.length(); ++it) {
    const double mid = 0.5 * (left + right);
    if (positive_mass(mid) < target) {
      left = mid;
    } else {
      right = mid;
    }
  }
  return 0.5 * (left + right);
}

Vector PolyDensity::grid_density() const {
  Vector phi(grid_.t.size());
  for (Eigen::Index k = 0; k < phi.size(); ++k) phi(k) = density(grid_.t(k));
  return phi;
}

Vector PolyDensity::cdf_table() const {
  Vector c(grid_.t.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = cdf(grid_.t(k));
  return c;
}

double eval_density(const PolyDensity& phi, double t) { return phi.density(t); }
double eval_cdf(const PolyDensity& phi, double t) { return phi.cdf(t); }
double quantile(const PolyDensity& phi, double u) { return phi.quantile(u); }

Matrix regression_grid(const SimpsonGrid& grid, const ModelSpec& model, const NoiseSpec& noise,
                       const Vector& beta0) {
  Matrix f(grid.t.size(), static_cast<Eigen::Index>(model.p));
  for (Eigen::Index k = 0; k < f.rows(); ++k) {
    f.row(k) = regression_vector(model, noise, grid.t(k), beta0);
  }
  return f;
}

Matrix moment_matrix_W(const SimpsonGrid& grid, const Vector& phi, const Matrix& f) {
  const Vector weights = grid.w.cwiseProduct(phi);
  Matrix w = f.transpose() * weights.asDiagonal() * f;
  return 0.5 * (w + w.transpose());
}

Matrix moment_matrix_W(const PolyDensity& phi, const ModelSpec& model, const NoiseSpec& noise,
                       const Vector& beta0) {
  return moment_matrix_W(phi.grid(), phi.grid_density(),
                         regression_grid(phi.grid(), model, noise, beta0));
}

Matrix correlation_matrix_R(const SimpsonGrid& grid, const Vector& phi, const Matrix& f,
                            const CorrelationSpec& corr) {
  Vector weights(phi.size());
  for (Eigen::Index k = 0; k < phi.size(); ++k) {
    const double arg = 1.0 / phi(k);
    if (!(phi(k) > kPhiFloor) || arg > kQArgumentCap) {
      weights(k) = 0.0;
    } else {
      weights(k) = grid.w(k) * phi(k) * q_function(corr, arg);
    }
  }
  Matrix r = f.transpose() * weights.asDiagonal() * f;
  return 0.5 * (r + r.transpose());
}

Matrix correlation_matrix_R(const PolyDensity& phi, const ModelSpec& model,
                            const NoiseSpec& noise, const Vector& beta0,
                            const CorrelationSpec& corr) {
  return correlation_matrix_R(phi.grid(), phi.grid_density(),
                              regression_grid(phi.grid(), model, noise, beta0), corr);
}

CorrelationSpec asymptotic_kernel(const CorrelationSpec& corr, std::optional<std::size_t> n) {
  if (!corr.scale || !n) return corr;
  return corr.with_time_factor(*corr.scale / static_cast<double>(*n));
}

Matrix asymptotic_covariance_V(const Matrix& w, const Matrix& r, double sigma2, double gamma) {
  Matrix w_inv;
  try {
    w_inv = spd_inverse(w, "W(phi)").inverse;
  } catch (const SingularDesignError& e) {
    throw DegenerateDensityError(e.what());
  }
  Matrix v = sigma2 * (w_inv + 2.0 * gamma * w_inv * r * w_inv);
  return 0.5 * (v + v.transpose());
}

Matrix asymptotic_covariance_V(const PolyDensity& phi, const PopulationProblem& problem,
                               std::optional<std::size_t> n) {
  const Vector values = phi.grid_density();
  const Matrix f = regression_grid(phi.grid(), problem.model, problem.noise, problem.pop.beta0);
  const Matrix w = moment_matrix_W(phi.grid(), values, f);
  const Matrix r = problem.corr.gamma == 0.0
                       ? Matrix::Zero(w.rows(), w.cols()).eval()
                       : correlation_matrix_R(phi.grid(), values, f,
                                              asymptotic_kernel(problem.corr, n));
  return asymptotic_covariance_V(w, r, problem.noise.sigma2, problem.corr.gamma);
}

std::string_view rule_name(QuantileRule rule) {
  switch (rule) {
    case QuantileRule::endpoints: return "endpoints";
    case QuantileRule::interior: return "interior";
    case QuantileRule::upper: return "upper";
  }
  return "endpoints";
}

QuantileRule parse_rule(std::string_view name) {
  if (name == "endpoints") return QuantileRule::endpoints;
  if (name == "interior") return QuantileRule::interior;
  if (name == "upper") return QuantileRule::upper;
  throw ValidationError("unknown rule '" + std::string(name) + "'", "design.rule");
}

std::vector<double> rule_levels(std::size_t n, QuantileRule rule) {
  if (n < 1 || (rule == QuantileRule::endpoints && n < 2)) {
    throw ValidationError("too few points for rule " + std::string(rule_name(rule)), "design.n");
  }
  std::vector<double> u(n);
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double id = static_cast<double>(i);
    switch (rule) {
      case QuantileRule::endpoints: u[i] = id / (nd - 1.0); break;
      case QuantileRule::interior: u[i] = (id + 1.0) / (nd + 1.0); break;
      case QuantileRule::upper: u[i] = (id + 1.0) / nd; break;
    }
  }
  if (rule == QuantileRule::endpoints) u.back() = 1.0;
  if (rule == QuantileRule::upper) u.back() = 1.0;
  return u;
}

ExactDesign design_from_density(const PolyDensity& phi, std::size_t n, QuantileRule rule) {
  const std::vector<double> levels = rule_levels(n, rule);
  std::vector<double> points(n);
  for (std::size_t i = 0; i < n; ++i) points[i] = phi.quantile(levels[i]);
  if (!ExactDesign::feasible(points, phi.domain())) {
    throw DegenerateDesignError(
        "quantile design has coinciding points (density vanishes between quantile levels)");
  }
  return ExactDesign(std::move(points), phi.domain());
}

}  // namespace odeng
