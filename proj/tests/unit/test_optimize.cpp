#include "doctest.h"

#include "odeng/error.hpp"
#include "odeng/optimize.hpp"

#include <cmath>
#include <limits>

using namespace odeng;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

PopulationProblem quadratic(double gamma, double lambda) {
  PopulationProblem p;
  p.model = builtin_model("quadratic");
  p.noise = make_noise(0.5);
  p.corr.gamma = gamma;
  p.corr.lambda = lambda;
  p.pop.beta0 = Vector::Zero(3);
  p.pop.vp = 0.09 * Matrix::Identity(3, 3);
  p.domain = {-1.0, 1.0};
  return p;
}

PopulationProblem compartmental() {
  PopulationProblem p;
  p.model = builtin_model("compartmental-fo");
  p.noise = make_noise(0.01);
  p.corr.gamma = 0.6;
  p.corr.lambda = 0.2;
  p.pop.beta0 = vec({1.0, 0.5});
  p.pop.vp = Matrix::Zero(2, 2);
  p.pop.vp(0, 0) = 0.01;
  p.pop.vp(1, 1) = 0.0025;
  p.domain = {0.0, 10.0};
  return p;
}

}  // namespace

TEST_CASE("Nelder-Mead on smooth problems") {
  const OptimResult r = nelder_mead([](const Vector& x) { return (x(0) - 1.0) * (x(0) - 1.0); },
                                    vec({0.0}));
  CHECK(r.converged);
  CHECK(std::abs(r.x(0) - 1.0) < 1e-4);

  const OptimResult s =
      nelder_mead([](const Vector& x) { return x.squaredNorm(); }, vec({1.0, -2.0, 0.5}));
  CHECK(s.value < 1e-9);

  SimplexConfig cfg;
  cfg.max_iter = 5000;
  cfg.f_tol = 1e-14;
  cfg.max_restarts = 3;
  const auto rosen = [](const Vector& x) {
    return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
  };
  const OptimResult ro = nelder_mead(rosen, vec({-1.2, 1.0}), cfg);
  CHECK(std::abs(ro.x(0) - 1.0) < 1e-3);
  CHECK(std::abs(ro.x(1) - 1.0) < 1e-3);
}

TEST_CASE("Nelder-Mead is invariant to constant shifts") {
  const auto f = [](const Vector& x) { return std::pow(x(0) - 0.3, 2) + 2.0 * std::pow(x(1) + 1, 2); };
  const OptimResult a = nelder_mead(f, vec({2.0, 2.0}));
  const OptimResult b = nelder_mead([&](const Vector& x) { return f(x) + 7.0; }, vec({2.0, 2.0}));
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(b.value - a.value == doctest::Approx(7.0).epsilon(1e-8));
}

TEST_CASE("Nelder-Mead treats non-finite values as penalties") {
  const auto f = [](const Vector& x) {
    return x(0) < 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::pow(x(0) - 0.5, 2);
  };
  const OptimResult r = nelder_mead(f, vec({2.0}));
  CHECK(std::abs(r.x(0) - 0.5) < 1e-4);
  CHECK_THROWS_AS(nelder_mead(f, vec({-1.0})), ValidationError);

  SimplexConfig bad;
  bad.max_iter = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("degree 0 returns the uniform density") {
  DensityOptions o;
  o.degree = 0;
  const DensityOptimum r = optimize_density(compartmental(), o);
  CHECK(r.degree == 0);
  CHECK(r.density.scaled_coefficients().size() == 1);
  CHECK(r.criterion == r.uniform_criterion);
}

TEST_CASE("density optimization is deterministic and beats the uniform density") {
  const PopulationProblem p = compartmental();
  DensityOptions o;
  o.degree = 4;
  o.restarts = 3;
  const DensityOptimum a = optimize_density(p, o);
  const DensityOptimum b = optimize_density(p, o);
  CHECK(a.criterion == b.criterion);
  CHECK(a.density.scaled_coefficients() == b.density.scaled_coefficients());
  CHECK(a.criterion <= a.uniform_criterion);
  CHECK(density_criterion(a.density, p) == doctest::Approx(a.criterion).epsilon(1e-12));
}

TEST_CASE("more restarts never hurt") {
  const PopulationProblem p = compartmental();
  DensityOptions one;
  one.degree = 4;
  one.restarts = 1;
  DensityOptions many = one;
  many.restarts = 8;
  CHECK(optimize_density(p, many).criterion <= optimize_density(p, one).criterion);
}

TEST_CASE("density options are validated") {
  DensityOptions o;
  o.degree = -1;
  CHECK_THROWS_AS(o.validate(), ValidationError);
  o.degree = 2;
  o.restarts = 0;
  CHECK_THROWS_AS(o.validate(), ValidationError);
}

TEST_CASE("refinement never worsens the start") {
  const PopulationProblem p = compartmental();
  const ExactDesign init({1.0, 2.0, 3.0, 4.0}, p.domain);
  for (Estimator est : {Estimator::ols, Estimator::wls}) {
    const RefineResult r = refine_exact_design(p, init, est);
    CHECK(r.criterion <= r.initial_criterion);
    CHECK(r.initial_criterion == design_criterion(p, init, est));
    CHECK(design_criterion(p, r.design, est) == doctest::Approx(r.criterion).epsilon(1e-12));
    for (std::size_t j = 1; j < r.design.size(); ++j) CHECK(r.design[j] > r.design[j - 1]);
  }
}

TEST_CASE("refinement keeps an already flat start") {
  PopulationProblem p;
  p.model = builtin_model("constant");
  p.noise = make_noise(1.0);
  p.corr.gamma = 0.0;
  p.corr.lambda = 1.0;
  p.pop.beta0 = Vector::Zero(1);
  p.pop.vp = Matrix::Constant(1, 1, 0.1);
  p.domain = {0.0, 1.0};
  const ExactDesign init({0.1, 0.5, 0.9}, p.domain);
  const RefineResult r = refine_exact_design(p, init, Estimator::ols);
  CHECK(r.design.points() == init.points());
  CHECK(r.criterion == r.initial_criterion);
}

TEST_CASE("uncorrelated quadratic designs cluster at -1, 0 and 1") {
  const PopulationProblem p = quadratic(0.0, 5.0);
  const ExactDesign init({-0.9, -0.5, -0.1, 0.2, 0.6, 0.95}, p.domain);
  const RefineResult r = refine_exact_design(p, init, Estimator::ols);
  for (double target : {-1.0, 0.0, 1.0}) {
    int close = 0;
    for (double t : r.design.points()) close += std::abs(t - target) < 0.1;
    CHECK(close >= 1);
  }
}

TEST_CASE("exact_optimum picks the best start") {
  const PopulationProblem p = compartmental();
  const std::vector<ExactDesign> starts{ExactDesign({5.0, 6.0, 8.0, 9.5}, p.domain),
                                        ExactDesign({0.8, 1.8, 3.0, 4.5}, p.domain)};
  const RefineResult best = exact_optimum(p, starts, Estimator::ols);
  for (const auto& s : starts) {
    CHECK(best.criterion <= refine_exact_design(p, s, Estimator::ols).criterion);
  }
}
