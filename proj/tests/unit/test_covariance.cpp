#include "doctest.h"

#include "odeng/covariance.hpp"
#include "odeng/error.hpp"

#include <cmath>
#include <random>

using namespace odeng;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double ridge) {
  std::normal_distribution<double> z;
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = z(rng);
  }
  return a * a.transpose() / static_cast<double>(n) + ridge * Matrix::Identity(n, n);
}

PopulationProblem constant_problem(double sigma2, double gamma, double vp) {
  PopulationProblem p;
  p.model = builtin_model("constant");
  p.noise = make_noise(sigma2);
  p.corr.gamma = gamma;
  p.corr.lambda = 1.0;
  p.pop.beta0 = Vector::Zero(1);
  p.pop.vp = Matrix::Constant(1, 1, vp);
  p.domain = {0.0, 1.0};
  return p;
}

PopulationProblem quadratic_problem() {
  PopulationProblem p;
  p.model = builtin_model("quadratic");
  p.noise = make_noise(0.5);
  p.corr.gamma = 0.6;
  p.corr.lambda = 1.2;
  p.pop.beta0 = Vector::Zero(3);
  p.pop.vp = 0.09 * Matrix::Identity(3, 3);
  p.domain = {-1.0, 1.0};
  return p;
}

}  // namespace

TEST_CASE("design matrices") {
  const Domain dom{-1.0, 1.0};
  const ExactDesign d({-1.0, 0.0, 1.0}, dom);
  const Matrix x = design_matrix(d, builtin_model("quadratic"), NoiseSpec{}, Vector::Zero(3));
  Matrix expected(3, 3);
  expected << 1, -1, 1, 1, 0, 0, 1, 1, 1;
  CHECK(x == expected);

  const ExactDesign d4({-0.9, -0.2, 0.3, 0.7}, dom);
  CHECK(design_matrix(d4, builtin_model("constant"), NoiseSpec{}, Vector::Zero(1)) ==
        Matrix::Ones(4, 1));

  const ExactDesign dc({1.0, 2.0}, Domain{0.0, 10.0});
  Vector b(2);
  b << 1.0, 0.5;
  const Matrix xc = design_matrix(dc, builtin_model("compartmental-fo"), NoiseSpec{}, b);
  for (int j = 0; j < 2; ++j) {
    const double t = dc[static_cast<std::size_t>(j)];
    const double e1 = std::exp(-t);
    const double e2 = std::exp(-0.5 * t);
    const double g1 = (0.5 * (e1 - e2) + (t - 0.5 * t) * e1) / 0.25;
    const double g2 = -((e1 - e2) + (t - 0.5 * t) * e2) / 0.25;
    CHECK(std::abs(xc(j, 0) - g1) < 1e-12);
    CHECK(std::abs(xc(j, 1) - g2) < 1e-12);
  }
}

TEST_CASE("error covariance") {
  const Domain dom{0.0, 1.0};
  const ExactDesign d({0.0, 1.0}, dom);
  CorrelationSpec c;
  c.gamma = 0.0;
  c.lambda = 1.0;
  CHECK(error_covariance(d, make_noise(1.0), c) == Matrix::Identity(2, 2));

  c.gamma = 0.5;
  c.lambda = std::log(2.0);
  c.scale = 1.0;
  const Matrix v = error_covariance(d, make_noise(1.0), c);
  CHECK(v(0, 0) == 1.0);
  CHECK(v(1, 1) == 1.0);
  CHECK(v(0, 1) == doctest::Approx(0.25));
  CHECK(v(1, 0) == v(0, 1));

  c.gamma = 1.0;
  c.lambda = 1.0;
  const Matrix vh = error_covariance(d, make_noise(0.5, "t+1"), c);
  CHECK(vh(0, 0) == doctest::Approx(0.5));
  CHECK(vh(1, 1) == doctest::Approx(2.0));
  CHECK(vh(0, 1) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("the default correlation scale is the design size") {
  const ExactDesign d({0.0, 0.25, 0.5, 1.0}, Domain{0.0, 1.0});
  CorrelationSpec c;
  c.gamma = 1.0;
  c.lambda = 1.0;
  const Matrix v = error_covariance(d, make_noise(1.0), c);
  CHECK(v(0, 1) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("error covariance diagonal equals sigma2 h^2") {
  const ExactDesign d({0.1, 0.4, 0.45, 0.9}, Domain{0.0, 1.0});
  const NoiseSpec noise = make_noise(0.7, "1+t^2");
  for (Kernel k : {Kernel::exponential, Kernel::gaussian}) {
    for (double gamma : {0.0, 0.3, 1.0}) {
      CorrelationSpec c;
      c.kernel = k;
      c.gamma = gamma;
      c.lambda = 0.8;
      const Matrix v = error_covariance(d, noise, c);
      for (std::size_t j = 0; j < d.size(); ++j) {
        const double h = noise.h(d[j]);
        CHECK(v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) == 0.7 * h * h);
      }
    }
  }
}

TEST_CASE("OLS covariance") {
  const Matrix ones = Matrix::Ones(2, 1);
  CHECK(ols_covariance(ones, Matrix::Identity(2, 2), Matrix::Constant(1, 1, 0.1)).cov(0, 0) ==
        doctest::Approx(0.6));
  CHECK(ols_covariance(ones, mat2(1, 0.25, 0.25, 1), Matrix::Constant(1, 1, 0.1)).cov(0, 0) ==
        doctest::Approx(0.725));

  Matrix x(3, 3);
  x << 1, -1, 1, 1, 0, 0, 1, 1, 1;
  Matrix xtx(3, 3);
  xtx << 3, 0, 2, 0, 2, 0, 2, 0, 2;
  const Matrix oracle = xtx.inverse();
  const Matrix got = ols_covariance(x, Matrix::Identity(3, 3), Matrix::Zero(3, 3)).cov;
  CHECK((got - oracle).cwiseAbs().maxCoeff() < 1e-12);

  Matrix rank_deficient(3, 2);
  rank_deficient << 1, 2, 1, 2, 1, 2;
  CHECK_THROWS_AS(ols_covariance(rank_deficient, Matrix::Identity(3, 3), Matrix::Zero(2, 2)),
                  SingularDesignError);
}

TEST_CASE("WLS covariance") {
  CHECK(wls_covariance(Matrix::Ones(1, 1), Matrix::Constant(1, 1, 0.4),
                       Matrix::Constant(1, 1, 0.3))
            .cov(0, 0) == doctest::Approx(0.7));
  Matrix x(3, 3);
  x << 1, -1, 1, 1, 0, 0, 1, 1, 1;
  const Matrix w = wls_covariance(x, Matrix::Identity(3, 3), Matrix::Zero(3, 3)).cov;
  const Matrix o = ols_covariance(x, Matrix::Identity(3, 3), Matrix::Zero(3, 3)).cov;
  CHECK((w - o).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(wls_covariance(Matrix::Ones(2, 1), mat2(1, 0.25, 0.25, 1), Matrix::Constant(1, 1, 0.1))
            .cov(0, 0) == doctest::Approx(0.725));
}

TEST_CASE("criterion values") {
  Criterion d{CriterionType::D, std::nullopt};
  CHECK(criterion_value(Matrix::Identity(3, 3), d) == doctest::Approx(1.0));
  CHECK(criterion_value(mat2(2, 1, 1, 2), d) == doctest::Approx(3.0));
  Vector c(2);
  c << 0.0, 1.0;
  CHECK(criterion_value(mat2(2, 0, 0, 3), Criterion{CriterionType::c, c}) == doctest::Approx(3.0));
  CHECK_THROWS_AS(criterion_value(mat2(2, 0, 0, 3), Criterion{CriterionType::c, std::nullopt}),
                  ValidationError);
}

TEST_CASE("efficiency of a design against itself is one") {
  const PopulationProblem p = quadratic_problem();
  const ExactDesign d({-1.0, -0.4, 0.0, 0.5, 1.0}, p.domain);
  CHECK(efficiency(d, d, p, Estimator::ols) == doctest::Approx(1.0));
  CHECK(efficiency(d, d, p, Estimator::wls) == doctest::Approx(1.0));
  CHECK(efficiency_from_values(8.0, 1.0, CriterionType::D, 3) == doctest::Approx(0.5));
  CHECK(efficiency_from_values(8.0, 1.0, CriterionType::AUC, 3) == doctest::Approx(0.125));
}

TEST_CASE("WLS is Loewner-dominated by OLS") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z;
  std::uniform_int_distribution<int> pick_p(1, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = pick_p(rng);
    const int n = p + std::uniform_int_distribution<int>(0, 5)(rng);
    Matrix x(n, p);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < p; ++k) x(i, k) = z(rng);
    }
    const Matrix veps = random_spd(rng, n, 0.1);
    const Matrix vp = random_spd(rng, p, 0.0) * 0.5;
    const Matrix diff = ols_covariance(x, veps, vp).cov - wls_covariance(x, veps, vp).cov;
    CHECK(min_eigenvalue(diff) >= -1e-10);
  }
}

TEST_CASE("scaling sigma2 scales the OLS error term") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  Matrix x(6, 3);
  for (int i = 0; i < 6; ++i) {
    for (int k = 0; k < 3; ++k) x(i, k) = z(rng);
  }
  const Matrix v = random_spd(rng, 6, 0.2);
  const Matrix base = ols_covariance(x, v, Matrix::Zero(3, 3)).cov;
  for (double alpha : {0.25, 3.0, 10.0}) {
    const Matrix scaled = ols_covariance(x, alpha * v, Matrix::Zero(3, 3)).cov;
    CHECK((scaled - alpha * base).cwiseAbs().maxCoeff() <= 1e-13 * alpha * base.norm());
  }
}

TEST_CASE("Monte-Carlo OLS covariance") {
  const PopulationProblem p = constant_problem(1.0, 0.0, 0.1);
  const ExactDesign d({0.0, 1.0}, p.domain);
  const Matrix sim = simulate_ols_covariance(p, d, 200000, 42);
  CHECK(std::abs(sim(0, 0) - 0.6) / 0.6 < 0.02);

  const PopulationProblem zero = constant_problem(0.0, 0.0, 0.0);
  CHECK(simulate_ols_covariance(zero, d, 100, 1).cwiseAbs().maxCoeff() == 0.0);

  CHECK(simulate_ols_covariance(p, d, 5000, 9) == simulate_ols_covariance(p, d, 5000, 9));
  CHECK_THROWS_AS(simulate_ols_covariance(p, d, 1, 9), ValidationError);
}

TEST_CASE("Monte-Carlo error shrinks like 1/sqrt(K)") {
  const PopulationProblem p = quadratic_problem();
  const ExactDesign d({-1.0, -0.5, 0.0, 0.5, 1.0}, p.domain);
  const Matrix analytic = design_covariance(p, d, Estimator::ols).cov;
  double small_k = 0.0;
  double large_k = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    small_k += (simulate_ols_covariance(p, d, 40000, seed) - analytic).norm();
    large_k += (simulate_ols_covariance(p, d, 160000, seed + 100) - analytic).norm();
  }
  CHECK(large_k / small_k < 0.65);
}
