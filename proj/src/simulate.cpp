#include "odeng/covariance.hpp"
#include "odeng/error.hpp"
#include "odeng/parallel.hpp"

#include <random>

namespace odeng {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Matrix simulate_ols_covariance(const PopulationProblem& problem, const ExactDesign& design,
                               std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("needs at least 2 replicates", "validate.k");
  const auto n = static_cast<Eigen::Index>(design.size());
  const auto p = static_cast<Eigen::Index>(problem.p());
  const Vector& beta0 = problem.pop.beta0;

  Matrix g(n, p);
  Vector h(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double t = design[static_cast<std::size_t>(j)];
    g.row(j) = problem.model.grad(t, beta0);
    h(j) = problem.noise.h(t);
  }
  const Matrix x = h.cwiseInverse().asDiagonal() * g;
  const SpdInverse xtx = spd_inverse(x.transpose() * x, "X^T X");
  const Matrix estimator = xtx.inverse * x.transpose() * h.cwiseInverse().asDiagonal();

  const Matrix lp = psd_factor(problem.pop.vp);
  const Matrix le = psd_factor(error_covariance(design, problem.noise, problem.corr));

  Matrix estimates(p, static_cast<Eigen::Index>(k));
  parallel_for(k, [&](std::size_t i) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i))));
    std::normal_distribution<double> normal;
    Vector zp(p);
    Vector ze(n);
    for (Eigen::Index a = 0; a < p; ++a) zp(a) = normal(rng);
    for (Eigen::Index a = 0; a < n; ++a) ze(a) = normal(rng);
    const Vector b = beta0 + lp * zp;
    const Vector y = g * b + le * ze;
    estimates.col(static_cast<Eigen::Index>(i)) = estimator * y;
  });

  const Vector mean = estimates.rowwise().mean();
  const Matrix centered = estimates.colwise() - mean;
  Matrix cov = centered * centered.transpose() / static_cast<double>(k - 1);
  return 0.5 * (cov + cov.transpose());
}

}  // namespace odeng
