#pragma once

#include "odeng/config.hpp"
#include "odeng/covariance.hpp"
#include "odeng/optimize.hpp"
#include "odeng/sensitivity.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace odeng {

struct RunOverrides {
  std::optional<int> quad_nodes;
  std::optional<std::uint64_t> seed;
};

ProblemConfig apply_overrides(ProblemConfig config, const RunOverrides& overrides);

DensityOptions density_options(const ProblemConfig& config);

struct SolveResult {
  ProblemConfig config;
  DensityOptimum density;
  ExactDesign quantile_design;
  double quantile_criterion = 0.0;
  ExactDesign uniform_design;  // same rule applied to the uniform density
  double uniform_criterion = 0.0;
  std::optional<RefineResult> refined;
  std::optional<double> quantile_efficiency;
  std::optional<double> uniform_efficiency;
  double seconds = 0.0;
};

// Steps (1)-(4): density optimization, quantile design, optional refinement.
// The refinement starts from both the quantile and the uniform design.
SolveResult run_solve(const ProblemConfig& config);
Json solve_json(const SolveResult& result);

// `t,phi,cdf` rows on the quadrature grid.
std::string density_csv(const PolyDensity& phi);

struct EfficiencyEntry {
  Estimator estimator = Estimator::ols;
  double criterion = 0.0;
  double reference_criterion = 0.0;
  double efficiency = 0.0;
  std::vector<double> reference;
  bool ill_conditioned = false;
};

struct EfficiencyReport {
  std::vector<double> design;
  bool reference_given = false;
  std::vector<EfficiencyEntry> entries;  // OLS, WLS
};

// Compares `design` with `reference`, or, when none is given, with the exact
// optimum refined from the design itself, the quantile design of the optimal
// density and the uniform design of the same size.
EfficiencyReport run_efficiency(const ProblemConfig& config, const std::vector<double>& design,
                                const std::optional<std::vector<double>>& reference);
Json efficiency_json(const ProblemConfig& config, const EfficiencyReport& report);

std::vector<SensitivityNode> run_sensitivity(const ProblemConfig& config,
                                             const std::vector<double>& design,
                                             const std::vector<SensitivityAxis>& axes, int grid);
// Header `beta<i>,...,efficiency` with 1-based parameter indices; failed
// nodes print `nan`.
std::string sensitivity_csv(const std::vector<SensitivityNode>& nodes,
                            const std::vector<SensitivityAxis>& axes);
Json sensitivity_json(const ProblemConfig& config, const std::vector<double>& design,
                      const std::vector<SensitivityAxis>& axes, int grid,
                      const std::vector<SensitivityNode>& nodes);

struct ValidationReport {
  Matrix analytic;
  Matrix empirical;
  double relative_error = 0.0;  // Frobenius, relative to the analytic matrix
  bool pass = false;            // relative_error <= 5%
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

inline constexpr double kValidationTolerance = 0.05;

ValidationReport run_validation(const ProblemConfig& config, const std::vector<double>& design,
                                std::size_t k, std::uint64_t seed);
Json validation_json(const ProblemConfig& config, const std::vector<double>& design,
                     const ValidationReport& report);

// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace odeng
