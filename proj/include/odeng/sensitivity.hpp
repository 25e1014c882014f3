#pragma once

#include "odeng/optimize.hpp"

#include <string>
#include <vector>

namespace odeng {

// Coordinate `index` of beta swept over [lo, hi].
struct SensitivityAxis {
  std::size_t index = 0;
  double lo = 0.0;
  double hi = 0.0;
};

struct SensitivityNode {
  std::vector<double> coords;  // one value per axis
  Vector beta;
  double efficiency = 0.0;
  bool ok = false;
  std::string error;  // reason when !ok
};

// Efficiency of `design` at every node of the tensor grid spanned by the axes
// (grid points per axis, first axis outermost). At each node the reference is
// the exact optimum for that beta, refined from `design`. Nodes whose
// evaluation fails are flagged instead of aborting the sweep.
std::vector<SensitivityNode> sensitivity_grid(const ExactDesign& design,
                                              const PopulationProblem& problem,
                                              const std::vector<SensitivityAxis>& axes,
                                              int grid, Estimator estimator,
                                              const SimplexConfig& config =
                                                  default_refine_simplex());

}  // namespace odeng
