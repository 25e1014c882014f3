#pragma once

#include "odeng/covariance.hpp"
#include "odeng/density.hpp"
#include "odeng/nelder_mead.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace odeng {

// Simplex settings used for the density coefficients.
SimplexConfig default_density_simplex();
// Simplex settings used for exact design points.
SimplexConfig default_refine_simplex();

struct DensityOptions {
  int degree = 6;
  int restarts = 8;
  QuadratureSpec quad;
  SimplexConfig simplex = default_density_simplex();
  std::uint64_t seed = 1;
  // Size of the exact design the density is meant for; only used to apply a
  // correlation.scale override.
  std::optional<std::size_t> n;
  // Coefficient noise of restarts 1..restarts-1 around the uniform density.
  double perturbation = 0.2;

  void validate() const;
};

struct DensityOptimum {
  PolyDensity density;
  OptimResult result;  // result.value is the criterion of `density`
  int degree = 0;
  double criterion = 0.0;
  double uniform_criterion = 0.0;
};

// Criterion of V(phi).
double density_criterion(const PolyDensity& phi, const PopulationProblem& problem,
                         std::optional<std::size_t> n = std::nullopt);

// Minimizes the criterion of V(phi) over polynomial densities of degree 2, 4 and
// options.degree. Restart 0 of every degree starts at the uniform density, the
// others at seeded perturbations of it. Ties go to the lower degree, then the
// lower restart index.
DensityOptimum optimize_density(const PopulationProblem& problem,
                                const DensityOptions& options = {});

struct RefineResult {
  ExactDesign design;
  OptimResult result;  // result.value is the criterion of `design`
  double criterion = 0.0;
  double initial_criterion = 0.0;
};

// Moves the points of `init` to minimize the criterion of the OLS or WLS
// covariance. Points are t_lo + |T| * cumsum(softmax(z, 0)), so every iterate is
// ordered and inside T. Returns `init` unchanged unless strictly improved.
RefineResult refine_exact_design(const PopulationProblem& problem, const ExactDesign& init,
                                 Estimator estimator,
                                 const SimplexConfig& config = default_refine_simplex());

// Best refinement over several starting designs (evaluated in parallel; ties go
// to the earlier start).
RefineResult exact_optimum(const PopulationProblem& problem, std::span<const ExactDesign> starts,
                           Estimator estimator,
                           const SimplexConfig& config = default_refine_simplex());

}  // namespace odeng
