#include "odeng/design.hpp"

#include "odeng/error.hpp"

#include <cmath>
#include <sstream>

namespace odeng {

void Domain::validate() const {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    std::ostringstream msg;
    msg << "must satisfy t_lo < t_hi, got [" << lo << ", " << hi << "]";
    throw ValidationError(msg.str(), "domain");
  }
}

bool ExactDesign::feasible(std::span<const double> points, const Domain& domain) {
  if (points.empty()) return false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i]) || !domain.contains(points[i])) return false;
    if (i > 0 && !(points[i] - points[i - 1] >= domain.spacing_floor())) return false;
  }
  return true;
}

ExactDesign::ExactDesign(std::vector<double> points, const Domain& domain)
    : points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("design has no points", "design");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i]) || !domain.contains(points_[i])) {
      std::ostringstream msg;
      msg << "point " << points_[i] << " lies outside [" << domain.lo << ", " << domain.hi << "]";
      throw ValidationError(msg.str(), "design");
    }
    if (i > 0 && !(points_[i] - points_[i - 1] >= domain.spacing_floor())) {
      std::ostringstream msg;
      msg << "points must be strictly increasing with spacing >= " << domain.spacing_floor()
          << " (got " << points_[i - 1] << ", " << points_[i] << ")";
      throw ValidationError(msg.str(), "design");
    }
  }
}

PopulationSpec PopulationSpec::validated() const {
  if (vp.rows() != vp.cols() || vp.rows() != beta0.size()) {
    throw ValidationError("Vp must be p x p with p = size of beta0", "population.Vp");
  }
  const double asym = (vp - vp.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, vp.cwiseAbs().maxCoeff())) {
    throw ValidationError("Vp must be symmetric", "population.Vp");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (vp + vp.transpose()));
  Vector values = eig.eigenvalues();
  if (values.size() > 0 && values.minCoeff() < -1e-10) {
    throw ValidationError("Vp must be positive semidefinite", "population.Vp");
  }
  PopulationSpec out = *this;
  if (values.size() > 0 && values.minCoeff() < 0.0) {
    values = values.cwiseMax(0.0);
    out.vp = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  } else {
    out.vp = 0.5 * (vp + vp.transpose());
  }
  return out;
}

std::string_view criterion_name(CriterionType type) {
  switch (type) {
    case CriterionType::D: return "D";
    case CriterionType::c: return "c";
    case CriterionType::AUC: return "AUC";
  }
  return "D";
}

CriterionType parse_criterion(std::string_view name) {
  if (name == "D") return CriterionType::D;
  if (name == "c") return CriterionType::c;
  if (name == "AUC") return CriterionType::AUC;
  throw ValidationError("unknown criterion '" + std::string(name) + "'", "criterion.type");
}

std::string_view estimator_name(Estimator estimator) {
  return estimator == Estimator::ols ? "OLS" : "WLS";
}

Estimator parse_estimator(std::string_view name) {
  if (name == "OLS") return Estimator::ols;
  if (name == "WLS") return Estimator::wls;
  throw ValidationError("unknown estimator '" + std::string(name) + "'", "refine.estimator");
}

std::optional<Vector> PopulationProblem::c_vector() const {
  switch (crit.type) {
    case CriterionType::D: return std::nullopt;
    case CriterionType::c: return crit.c;
    case CriterionType::AUC: return auc_gradient(model, pop.beta0);
  }
  return std::nullopt;
}

PopulationProblem PopulationProblem::with_beta(const Vector& beta) const {
  PopulationProblem out = *this;
  out.pop.beta0 = beta;
  return out;
}

void PopulationProblem::validate() const {
  domain.validate();
  noise.validate();
  corr.validate();
  const auto p = static_cast<Eigen::Index>(model.p);
  if (pop.beta0.size() != p) {
    throw ValidationError("length must equal model parameter count " + std::to_string(p),
                          "model.beta0");
  }
  if (pop.vp.rows() != p || pop.vp.cols() != p) {
    throw ValidationError("must be " + std::to_string(p) + " x " + std::to_string(p),
                          "population.Vp");
  }
  if (model.check_params) model.check_params(pop.beta0);
  if (crit.type == CriterionType::c) {
    if (!crit.c || crit.c->size() != p) {
      throw ValidationError("c-criterion needs a vector of length " + std::to_string(p),
                            "criterion.c");
    }
    if (crit.c->isZero(0.0)) throw ValidationError("must be nonzero", "criterion.c");
  }
  if (crit.type == CriterionType::AUC) {
    const Vector c = auc_gradient(model, pop.beta0);
    if (c.isZero(0.0)) throw ValidationError("AUC gradient vanishes at beta0", "criterion.type");
  }
}

}  // namespace odeng
