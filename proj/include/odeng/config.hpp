#pragma once

#include "odeng/density.hpp"
#include "odeng/design.hpp"
#include "odeng/optimize.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace odeng {

using Json = nlohmann::json;

struct ModelConfig {
  std::string name;        // builtin name, empty for expression models
  std::string expression;  // used when name is empty
  std::size_t p = 0;
  std::optional<int> degree;
  Vector beta0;
};

// One problem document. Every section maps to the JSON key of the same name.
struct ProblemConfig {
  ModelConfig model;
  Domain domain;
  double sigma2 = 1.0;
  std::string h = "1";
  CorrelationSpec correlation;
  Matrix vp;
  CriterionType criterion = CriterionType::D;
  std::optional<Vector> c;

  int degree = 6;
  int restarts = 8;
  int quad_nodes = 201;
  std::uint64_t seed = 1;

  std::size_t n = 0;  // 0 when the config has no design section
  QuantileRule rule = QuantileRule::endpoints;

  bool refine = true;
  Estimator estimator = Estimator::ols;

  SimplexConfig density_simplex = default_density_simplex();
  SimplexConfig refine_simplex = default_refine_simplex();
};

// Parses and validates a config document. Errors are ValidationErrors whose
// key() is the dotted path of the offending entry.
ProblemConfig parse_config(const Json& doc);
ProblemConfig load_config(const std::filesystem::path& path);

// Canonical document; parse_config(to_json(c)) reproduces c.
Json to_json(const ProblemConfig& config);

PopulationProblem build_problem(const ProblemConfig& config);

// Reads a design file: a JSON array of reals, or an object with a "points" array.
std::vector<double> load_design_points(const std::filesystem::path& path);

Json matrix_to_json(const Matrix& m);
Json vector_to_json(const Vector& v);

}  // namespace odeng
