#pragma once

#include "odeng/linalg.hpp"

#include <functional>

namespace odeng {

struct SimplexConfig {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  int max_iter = 2000;
  // Stop when f(worst) - f(best) < f_tol (absolute) and the simplex centroid
  // is no better than f(best) - f_tol.
  double f_tol = 1e-10;
  // Stop when every vertex lies within x_tol * max(1, |x_best|) of the best one.
  double x_tol = 1e-9;
  // Initial simplex edge along coordinate k: initial_step * max(1, |x0_k|).
  double initial_step = 0.1;
  // Fresh simplices built around the best point after convergence, as long as
  // each one still improves the value.
  int max_restarts = 0;
  // Dimension-dependent coefficients (Gao and Han); overrides the four above.
  bool adaptive = false;

  // Throws ValidationError naming the offending `optimizer.*` key.
  void validate() const;
};

struct OptimResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  int restarts_used = 0;
};

using Objective = std::function<double(const Vector&)>;

// Downhill simplex minimization. Non-finite objective values (NaN included)
// act as +inf penalties. Throws ValidationError when the objective is not
// finite at x0.
OptimResult nelder_mead(const Objective& objective, const Vector& x0,
                        const SimplexConfig& config = {});

}  // namespace odeng
