#include "odeng/pipeline.hpp"

#include "odeng/error.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace odeng {

namespace {

std::string format_real(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

Json points_json(const std::vector<double>& pts) { return Json(pts); }

Json optim_json(const OptimResult& r) {
  return Json{{"x", vector_to_json(r.x)},
              {"value", r.value},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"restarts_used", r.restarts_used}};
}

}  // namespace

ProblemConfig apply_overrides(ProblemConfig config, const RunOverrides& overrides) {
  if (overrides.quad_nodes) {
    QuadratureSpec{*overrides.quad_nodes}.validate();
    config.quad_nodes = *overrides.quad_nodes;
  }
  if (overrides.seed) config.seed = *overrides.seed;
  return config;
}

DensityOptions density_options(const ProblemConfig& config) {
  DensityOptions o;
  o.degree = config.degree;
  o.restarts = config.restarts;
  o.quad = {config.quad_nodes};
  o.simplex = config.density_simplex;
  o.seed = config.seed;
  if (config.n > 0) o.n = config.n;
  return o;
}

SolveResult run_solve(const ProblemConfig& config) {
  if (config.n == 0) throw ValidationError("solve needs a design section", "design.n");
  const auto start = std::chrono::steady_clock::now();
  const PopulationProblem problem = build_problem(config);
  DensityOptimum density = optimize_density(problem, density_options(config));
  ExactDesign quantile = design_from_density(density.density, config.n, config.rule);
  ExactDesign uniform = design_from_density(
      PolyDensity::uniform(problem.domain, {config.quad_nodes}), config.n, config.rule);

  SolveResult out{config,
                  std::move(density),
                  quantile,
                  design_criterion(problem, quantile, config.estimator),
                  uniform,
                  design_criterion(problem, uniform, config.estimator),
                  std::nullopt,
                  std::nullopt,
                  std::nullopt,
                  0.0};
  if (config.refine) {
    const std::vector<ExactDesign> starts{quantile, uniform};
    out.refined = exact_optimum(problem, starts, config.estimator, config.refine_simplex);
    out.quantile_efficiency = efficiency_from_values(out.quantile_criterion, out.refined->criterion,
                                                     problem.crit.type, problem.p());
    out.uniform_efficiency = efficiency_from_values(out.uniform_criterion, out.refined->criterion,
                                                    problem.crit.type, problem.p());
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Json solve_json(const SolveResult& r) {
  const PolyDensity& phi = r.density.density;
  Json density{{"degree", r.density.degree},
               {"coefficients", vector_to_json(phi.coefficients())},
               {"scaled_coefficients", vector_to_json(phi.scaled_coefficients())},
               {"norm", phi.norm()},
               {"criterion", r.density.criterion},
               {"uniform_criterion", r.density.uniform_criterion},
               {"optimizer", optim_json(r.density.result)}};
  Json out{{"command", "solve"},
           {"config", to_json(r.config)},
           {"seed", r.config.seed},
           {"density", density},
           {"estimator", std::string(estimator_name(r.config.estimator))},
           {"quantile_design",
            {{"rule", std::string(rule_name(r.config.rule))},
             {"points", points_json(r.quantile_design.points())},
             {"criterion", r.quantile_criterion}}},
           {"uniform_design",
            {{"points", points_json(r.uniform_design.points())},
             {"criterion", r.uniform_criterion}}},
           {"seconds", r.seconds}};
  if (r.refined) {
    out["refined_design"] = {{"points", points_json(r.refined->design.points())},
                             {"criterion", r.refined->criterion},
                             {"optimizer", optim_json(r.refined->result)}};
    out["efficiency"] = {{"quantile_design", *r.quantile_efficiency},
                         {"uniform_design", *r.uniform_efficiency}};
  }
  return out;
}

std::string density_csv(const PolyDensity& phi) {
  std::ostringstream out;
  out << "t,phi,cdf\n";
  const Vector& t = phi.grid().t;
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    out << format_real(t(k)) << ',' << format_real(phi.density(t(k))) << ','
        << format_real(phi.cdf(t(k))) << '\n';
  }
  return out.str();
}

EfficiencyReport run_efficiency(const ProblemConfig& config, const std::vector<double>& design,
                                const std::optional<std::vector<double>>& reference) {
  const PopulationProblem problem = build_problem(config);
  const ExactDesign a(design, problem.domain);
  EfficiencyReport report;
  report.design = design;
  report.reference_given = reference.has_value();

  std::vector<ExactDesign> starts{a};
  if (!reference) {
    const QuantileRule rule = config.n > 0 ? config.rule : QuantileRule::endpoints;
    ProblemConfig sized = config;
    sized.n = a.size();
    try {
      const DensityOptimum opt = optimize_density(problem, density_options(sized));
      starts.push_back(design_from_density(opt.density, a.size(), rule));
    } catch (const NumericalError&) {
    }
    try {
      starts.push_back(design_from_density(
          PolyDensity::uniform(problem.domain, {config.quad_nodes}), a.size(), rule));
    } catch (const Error&) {
    }
  }

  for (Estimator est : {Estimator::ols, Estimator::wls}) {
    EfficiencyEntry e;
    e.estimator = est;
    const Estimate cov_a = design_covariance(problem, a, est);
    e.criterion = criterion_value(cov_a.cov, resolve_criterion(problem));
    e.ill_conditioned = cov_a.ill_conditioned();
    if (reference) {
      const ExactDesign b(*reference, problem.domain);
      e.reference = b.points();
      e.reference_criterion = design_criterion(problem, b, est);
    } else {
      const RefineResult opt = exact_optimum(problem, starts, est, config.refine_simplex);
      e.reference = opt.design.points();
      e.reference_criterion = opt.criterion;
    }
    e.efficiency =
        efficiency_from_values(e.criterion, e.reference_criterion, problem.crit.type, problem.p());
    report.entries.push_back(e);
  }
  return report;
}

Json efficiency_json(const ProblemConfig& config, const EfficiencyReport& report) {
  Json entries = Json::object();
  for (const auto& e : report.entries) {
    entries[std::string(estimator_name(e.estimator))] = {
        {"criterion", e.criterion},
        {"reference_criterion", e.reference_criterion},
        {"efficiency", e.efficiency},
        {"reference", points_json(e.reference)},
        {"ill_conditioned", e.ill_conditioned}};
  }
  return Json{{"command", "eff"},
              {"config", to_json(config)},
              {"seed", config.seed},
              {"design", points_json(report.design)},
              {"reference", report.reference_given ? "given" : "refined exact optimum"},
              {"results", entries}};
}

std::vector<SensitivityNode> run_sensitivity(const ProblemConfig& config,
                                             const std::vector<double>& design,
                                             const std::vector<SensitivityAxis>& axes, int grid) {
  const PopulationProblem problem = build_problem(config);
  const ExactDesign d(design, problem.domain);
  return sensitivity_grid(d, problem, axes, grid, config.estimator, config.refine_simplex);
}

std::string sensitivity_csv(const std::vector<SensitivityNode>& nodes,
                            const std::vector<SensitivityAxis>& axes) {
  std::ostringstream out;
  for (const auto& axis : axes) out << "beta" << axis.index + 1 << ',';
  out << "efficiency\n";
  for (const auto& node : nodes) {
    for (double c : node.coords) out << format_real(c) << ',';
    out << (node.ok ? format_real(node.efficiency) : std::string("nan")) << '\n';
  }
  return out.str();
}

Json sensitivity_json(const ProblemConfig& config, const std::vector<double>& design,
                      const std::vector<SensitivityAxis>& axes, int grid,
                      const std::vector<SensitivityNode>& nodes) {
  Json ax = Json::array();
  for (const auto& a : axes) ax.push_back({{"index", a.index + 1}, {"lo", a.lo}, {"hi", a.hi}});
  Json rows = Json::array();
  for (const auto& n : nodes) {
    Json row{{"coords", n.coords}, {"beta", vector_to_json(n.beta)}, {"ok", n.ok}};
    if (n.ok) {
      row["efficiency"] = n.efficiency;
    } else {
      row["error"] = n.error;
    }
    rows.push_back(row);
  }
  return Json{{"command", "sens"},  {"config", to_json(config)}, {"seed", config.seed},
              {"design", design},   {"axes", ax},                {"grid", grid},
              {"nodes", rows}};
}

ValidationReport run_validation(const ProblemConfig& config, const std::vector<double>& design,
                                std::size_t k, std::uint64_t seed) {
  const PopulationProblem problem = build_problem(config);
  const ExactDesign d(design, problem.domain);
  ValidationReport r;
  r.k = k;
  r.seed = seed;
  if (k < 1000) r.warnings.push_back("K < 1000: Monte-Carlo error is large");
  if (problem.model.kind != ModelKind::linear_basis) {
    r.warnings.push_back("nonlinear model: simulation uses the linearized model");
  }
  r.analytic = design_covariance(problem, d, Estimator::ols).cov;
  r.empirical = simulate_ols_covariance(problem, d, k, seed);
  const double scale = r.analytic.norm();
  const double diff = (r.empirical - r.analytic).norm();
  r.relative_error = scale > 0.0 ? diff / scale : diff;
  r.pass = r.relative_error <= kValidationTolerance;
  return r;
}

Json validation_json(const ProblemConfig& config, const std::vector<double>& design,
                     const ValidationReport& r) {
  return Json{{"command", "validate"},
              {"config", to_json(config)},
              {"seed", r.seed},
              {"k", r.k},
              {"design", design},
              {"analytic", matrix_to_json(r.analytic)},
              {"empirical", matrix_to_json(r.empirical)},
              {"relative_frobenius_error", r.relative_error},
              {"tolerance", kValidationTolerance},
              {"pass", r.pass},
              {"warnings", r.warnings}};
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace odeng
