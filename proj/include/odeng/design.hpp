#pragma once

#include "odeng/correlation.hpp"
#include "odeng/linalg.hpp"
#include "odeng/model.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace odeng {

// Design interval T = [lo, hi].
struct Domain {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool contains(double t) const { return t >= lo && t <= hi; }
  // Minimal admissible spacing between design points.
  double spacing_floor() const { return 1e-6 * length(); }
  void validate() const;
};

// Strictly increasing sampling times inside T, shared by every subject.
class ExactDesign {
 public:
  // Throws ValidationError when the points are unordered, outside the domain
  // or closer than domain.spacing_floor().
  ExactDesign(std::vector<double> points, const Domain& domain);

  const std::vector<double>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }

  // Same checks as the constructor without throwing.
  static bool feasible(std::span<const double> points, const Domain& domain);

 private:
  std::vector<double> points_;
};

// Population mean and random-effect covariance (K = 1).
struct PopulationSpec {
  Vector beta0;
  Matrix vp;

  // Checks symmetry (1e-12) and PSD (eigenvalues >= -1e-10); returns a copy with
  // tiny negative eigenvalues clipped to zero.
  PopulationSpec validated() const;
};

enum class CriterionType { D, c, AUC };

std::string_view criterion_name(CriterionType type);
CriterionType parse_criterion(std::string_view name);

struct Criterion {
  CriterionType type = CriterionType::D;
  std::optional<Vector> c;
};

enum class Estimator { ols, wls };

std::string_view estimator_name(Estimator estimator);
Estimator parse_estimator(std::string_view name);

// Everything needed to evaluate a design.
struct PopulationProblem {
  ModelSpec model;
  NoiseSpec noise;
  CorrelationSpec corr;
  PopulationSpec pop;
  Domain domain;
  Criterion crit;

  std::size_t p() const { return model.p; }

  // c-vector of the criterion at the nominal mean (AUC gradient for AUC).
  // Empty for D.
  std::optional<Vector> c_vector() const;

  // Copy with a different nominal mean.
  PopulationProblem with_beta(const Vector& beta) const;

  // Checks the cross-component consistency (dimensions, valid region).
  void validate() const;
};

}  // namespace odeng
