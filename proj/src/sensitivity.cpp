#include "odeng/sensitivity.hpp"

#include "odeng/error.hpp"
#include "odeng/parallel.hpp"

#include <cmath>

namespace odeng {

std::vector<SensitivityNode> sensitivity_grid(const ExactDesign& design,
                                              const PopulationProblem& problem,
                                              const std::vector<SensitivityAxis>& axes, int grid,
                                              Estimator estimator, const SimplexConfig& config) {
  if (grid < 2) throw ValidationError("must be >= 2", "sens.grid");
  if (axes.empty()) throw ValidationError("needs at least one axis", "sens.axes");
  for (const auto& axis : axes) {
    if (axis.index >= problem.p()) throw ValidationError("axis index out of range", "sens.axes");
    if (!(axis.lo <= axis.hi) || !std::isfinite(axis.lo) || !std::isfinite(axis.hi)) {
      throw ValidationError("box bounds must satisfy lo <= hi", "sens.box");
    }
  }

  const auto g = static_cast<std::size_t>(grid);
  std::size_t total = 1;
  for (std::size_t a = 0; a < axes.size(); ++a) total *= g;

  std::vector<SensitivityNode> nodes(total);
  for (std::size_t i = 0; i < total; ++i) {
    auto& node = nodes[i];
    node.beta = problem.pop.beta0;
    node.coords.resize(axes.size());
    std::size_t rest = i;
    for (std::size_t a = axes.size(); a-- > 0;) {
      const std::size_t k = rest % g;
      rest /= g;
      const auto& axis = axes[a];
      const double v = k + 1 == g ? axis.hi
                                  : axis.lo + (axis.hi - axis.lo) * static_cast<double>(k) /
                                                  static_cast<double>(g - 1);
      node.coords[a] = v;
      node.beta(static_cast<Eigen::Index>(axis.index)) = v;
    }
  }

  parallel_for(total, [&](std::size_t i) {
    auto& node = nodes[i];
    try {
      const PopulationProblem local = problem.with_beta(node.beta);
      const RefineResult ref = refine_exact_design(local, design, estimator, config);
      node.efficiency = efficiency_from_values(ref.initial_criterion, ref.criterion,
                                               local.crit.type, local.p());
      node.ok = std::isfinite(node.efficiency);
      if (!node.ok) node.error = "non-finite efficiency";
    } catch (const Error& e) {
      node.ok = false;
      node.error = e.what();
    }
  });
  return nodes;
}

}  // namespace odeng
