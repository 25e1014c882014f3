#include "odeng/optimize.hpp"

#include "odeng/error.hpp"
#include "odeng/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace odeng {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinGap = 1e-9;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Criterion of V(phi) as a function of scaled-basis coefficients, evaluated on
// a fixed quadrature grid.
class DensityObjective {
 public:
  DensityObjective(const PopulationProblem& problem, const QuadratureSpec& quad, int max_degree,
                   std::optional<std::size_t> n)
      : grid_(SimpsonGrid::make(problem.domain, quad)),
        f_(regression_grid(grid_, problem.model, problem.noise, problem.pop.beta0)),
        crit_(resolve_criterion(problem)),
        corr_(asymptotic_kernel(problem.corr, n)),
        sigma2_(problem.noise.sigma2),
        gamma_(problem.corr.gamma) {
    const double mid = 0.5 * (problem.domain.lo + problem.domain.hi);
    const double half = 0.5 * problem.domain.length();
    powers_.resize(grid_.t.size(), max_degree + 1);
    for (Eigen::Index k = 0; k < powers_.rows(); ++k) {
      const double s = (grid_.t(k) - mid) / half;
      double v = 1.0;
      for (int j = 0; j <= max_degree; ++j) {
        powers_(k, j) = v;
        v *= s;
      }
    }
  }

  double operator()(const Vector& q) const {
    const double m = q.cwiseAbs().maxCoeff();
    if (!(m > 0.0) || !std::isfinite(m)) return kInf;
    Vector phi = (powers_.leftCols(q.size()) * (q / m)).cwiseMax(0.0);
    const double norm = grid_.integrate(phi);
    if (!(norm >= 1e-12)) return kInf;
    phi /= norm;
    try {
      const Matrix w = moment_matrix_W(grid_, phi, f_);
      const Matrix r = gamma_ == 0.0 ? Matrix::Zero(w.rows(), w.cols()).eval()
                                     : correlation_matrix_R(grid_, phi, f_, corr_);
      const double v = criterion_value(asymptotic_covariance_V(w, r, sigma2_, gamma_), crit_);
      return std::isfinite(v) && v > 0.0 ? v : kInf;
    } catch (const NumericalError&) {
      return kInf;
    }
  }

 private:
  SimpsonGrid grid_;
  Matrix f_;
  Criterion crit_;
  CorrelationSpec corr_;
  double sigma2_;
  double gamma_;
  Matrix powers_;
};

std::vector<int> degree_schedule(int degree) {
  std::vector<int> out;
  for (int d : {2, 4}) {
    if (d < degree) out.push_back(d);
  }
  out.push_back(degree);
  return out;
}

struct Attempt {
  bool ok = false;
  OptimResult result;
};

}  // namespace

SimplexConfig default_density_simplex() {
  SimplexConfig c;
  c.adaptive = true;
  c.max_iter = 20000;
  c.f_tol = 1e-12;
  c.max_restarts = 2;
  return c;
}

SimplexConfig default_refine_simplex() {
  SimplexConfig c;
  c.max_iter = 2000;
  c.f_tol = 1e-13;
  c.max_restarts = 5;
  return c;
}

void DensityOptions::validate() const {
  if (degree < 0) throw ValidationError("must be >= 0", "density.degree");
  if (restarts < 1) throw ValidationError("must be >= 1", "density.restarts");
  if (!(perturbation >= 0.0)) throw ValidationError("must be >= 0", "density.perturbation");
  quad.validate();
  simplex.validate();
}

double density_criterion(const PolyDensity& phi, const PopulationProblem& problem,
                         std::optional<std::size_t> n) {
  return criterion_value(asymptotic_covariance_V(phi, problem, n), resolve_criterion(problem));
}

DensityOptimum optimize_density(const PopulationProblem& problem, const DensityOptions& options) {
  options.validate();
  problem.validate();
  const PolyDensity uniform = PolyDensity::uniform(problem.domain, options.quad);
  const double uniform_value = density_criterion(uniform, problem, options.n);
  if (!(std::isfinite(uniform_value) && uniform_value > 0.0)) {
    throw OptimizationFailedError("criterion of the uniform density is not positive and finite");
  }

  if (options.degree == 0) {
    OptimResult r;
    r.x = Vector::Ones(1);
    r.value = uniform_value;
    r.converged = true;
    return {uniform, r, 0, uniform_value, uniform_value};
  }

  const DensityObjective raw(problem, options.quad, options.degree, options.n);
  const Objective objective = [&raw, uniform_value](const Vector& q) {
    return raw(q) / uniform_value;
  };

  const std::vector<int> degrees = degree_schedule(options.degree);
  const auto restarts = static_cast<std::size_t>(options.restarts);
  std::vector<Attempt> attempts(degrees.size() * restarts);
  parallel_for(attempts.size(), [&](std::size_t task) {
    const int degree = degrees[task / restarts];
    const std::size_t restart = task % restarts;
    Vector x0 = Vector::Zero(degree + 1);
    x0(0) = 1.0;
    if (restart > 0) {
      std::mt19937_64 rng(mix(options.seed ^ mix(static_cast<std::uint64_t>(degree) * 1000003ULL +
                                                 static_cast<std::uint64_t>(restart))));
      std::normal_distribution<double> noise(0.0, options.perturbation);
      for (Eigen::Index k = 0; k < x0.size(); ++k) x0(k) += noise(rng);
    }
    if (!std::isfinite(objective(x0))) return;
    attempts[task].result = nelder_mead(objective, x0, options.simplex);
    attempts[task].ok = std::isfinite(attempts[task].result.value);
  });

  std::size_t best = attempts.size();
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    if (attempts[i].ok && (best == attempts.size() ||
                           attempts[i].result.value < attempts[best].result.value)) {
      best = i;
    }
  }
  if (best == attempts.size()) {
    throw OptimizationFailedError("every density restart was degenerate");
  }
  OptimResult result = attempts[best].result;
  const int degree = degrees[best / restarts];
  result.x /= result.x.cwiseAbs().maxCoeff();
  PolyDensity density = PolyDensity::from_scaled(result.x, problem.domain, options.quad);
  const double value = density_criterion(density, problem, options.n);
  result.value = value;
  return {std::move(density), result, degree, value, uniform_value};
}

RefineResult refine_exact_design(const PopulationProblem& problem, const ExactDesign& init,
                                 Estimator estimator, const SimplexConfig& config) {
  config.validate();
  const Domain& dom = problem.domain;
  if (!ExactDesign::feasible(init.points(), dom)) {
    throw ValidationError("initial design is not feasible for the domain", "design");
  }
  const double c0 = design_criterion(problem, init, estimator);
  if (!(std::isfinite(c0) && c0 > 0.0)) {
    throw NumericalError("criterion of the initial design is not positive and finite");
  }
  const auto n = static_cast<Eigen::Index>(init.size());
  const double length = dom.length();

  Vector z0(n);
  {
    std::vector<double> gaps(init.size() + 1);
    double prev = dom.lo;
    for (std::size_t i = 0; i < init.size(); ++i) {
      gaps[i] = std::max((init[i] - prev) / length, kMinGap);
      prev = init[i];
    }
    gaps.back() = std::max((dom.hi - prev) / length, kMinGap);
    for (Eigen::Index i = 0; i < n; ++i) {
      z0(i) = std::log(gaps[static_cast<std::size_t>(i)]) - std::log(gaps.back());
    }
  }

  auto points_of = [&](const Vector& z) {
    const double top = std::max(0.0, z.maxCoeff());
    double total = std::exp(-top);
    for (Eigen::Index i = 0; i < n; ++i) total += std::exp(z(i) - top);
    std::vector<double> pts(init.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += std::exp(z(i) - top) / total;
      pts[static_cast<std::size_t>(i)] = std::min(dom.hi, dom.lo + length * acc);
    }
    return pts;
  };

  const Objective objective = [&](const Vector& z) {
    if (!z.allFinite()) return kInf;
    const std::vector<double> pts = points_of(z);
    if (!ExactDesign::feasible(pts, dom)) return kInf;
    try {
      return design_criterion(problem, pts, estimator) / c0;
    } catch (const NumericalError&) {
      return kInf;
    } catch (const DomainError&) {
      return kInf;
    }
  };

  SimplexConfig cfg = config;
  cfg.max_iter = std::max(config.max_iter, 2000 * static_cast<int>(n));

  RefineResult out{init, {}, c0, c0};
  out.result.x = z0;
  out.result.value = c0;
  out.result.converged = true;
  if (!std::isfinite(objective(z0))) return out;

  OptimResult r = nelder_mead(objective, z0, cfg);
  const std::vector<double> pts = points_of(r.x);
  if (!ExactDesign::feasible(pts, dom)) return out;
  const double value = design_criterion(problem, pts, estimator);
  r.value = value;
  if (!(value < c0)) {
    out.result.iterations = r.iterations;
    out.result.restarts_used = r.restarts_used;
    return out;
  }
  return {ExactDesign(pts, dom), r, value, c0};
}

RefineResult exact_optimum(const PopulationProblem& problem, std::span<const ExactDesign> starts,
                           Estimator estimator, const SimplexConfig& config) {
  if (starts.empty()) throw ValidationError("no starting designs", "design");
  std::vector<std::optional<RefineResult>> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    results[i] = refine_exact_design(problem, starts[i], estimator, config);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i]->criterion < results[best]->criterion) best = i;
  }
  return *results[best];
}

}  // namespace odeng
