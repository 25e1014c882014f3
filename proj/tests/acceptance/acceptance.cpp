// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails.

#include "odeng/error.hpp"
#include "odeng/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace odeng;

namespace fs = std::filesystem;

namespace {

const fs::path kSource = ODENG_SOURCE_DIR;

// Tolerances.
constexpr double kPointTol = 0.10;
constexpr double kMaxSolveSeconds = 120.0;
constexpr double kEquidistantLo = 0.40;
constexpr double kEquidistantHi = 0.60;
constexpr double kQuantileMin = 0.85;
constexpr double kUzaraQuantileMin = 0.96;
constexpr double kLanicorQuantileMin = 0.92;
constexpr double kClinicalTol = 0.03;
constexpr double kLanicorEquidistantTol = 0.05;
constexpr double kUzaraEquidistantTol = 0.03;
constexpr double kWlsSlack = 0.02;
constexpr double kShapeCutoff = 6.0;
constexpr double kShapeTol = 0.5;
constexpr double kRobustnessMax = 0.02;
constexpr double kSensitivityMin = 0.5;
constexpr double kSelfEfficiencyTol = 0.01;
constexpr double kIdentityTol = 1e-10;
constexpr double kSeriesTol = 1e-10;
constexpr double kGradientTol = 1e-6;
constexpr double kLoewnerTol = 1e-10;
constexpr double kMonteCarloTol = 0.05;
constexpr double kInverseTol = 1e-8;
constexpr double kFlatCriterionTol = 0.01;
constexpr double kClusterRadius = 0.1;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) ok = false;
    detail << (cond ? "" : "!") << what << "; ";
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string fmt_points(const std::vector<double>& pts) {
  std::string s = "[";
  for (std::size_t i = 0; i < pts.size(); ++i) s += (i ? " " : "") + fmt(pts[i]);
  return s + "]";
}

ProblemConfig config(const char* name) { return load_config(kSource / "configs" / name); }

std::vector<double> design(const char* name) {
  return load_design_points(kSource / "configs" / "designs" / name);
}

double efficiency_against(const PopulationProblem& p, const std::vector<double>& pts,
                          const RefineResult& ref, Estimator est) {
  return efficiency_from_values(design_criterion(p, ExactDesign(pts, p.domain), est), ref.criterion,
                                p.crit.type, p.p());
}

bool run(const char* id, const std::function<void(Check&)>& body) {
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail << "exception: " << e.what();
  }
  std::printf("%s %s: %s\n", c.ok ? "PASS" : "FAIL", id, c.detail.str().c_str());
  std::fflush(stdout);
  return c.ok;
}

void ac1(Check& c) {
  struct Case {
    const char* file;
    std::vector<double> target;
  };
  const Case cases[] = {{"compartmental_d.json", design("xi4a.json")},
                        {"compartmental_d6.json", design("xi6a.json")}};
  for (const auto& cs : cases) {
    ProblemConfig cfg = config(cs.file);
    cfg.refine = false;
    const auto start = std::chrono::steady_clock::now();
    const SolveResult r = run_solve(cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto& got = r.quantile_design.points();
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      worst = std::max(worst, std::abs(got[i] - cs.target[i]));
    }
    c.expect(worst <= kPointTol, "n=" + std::to_string(got.size()) + " " + fmt_points(got) +
                                     " max dev " + fmt(worst));
    c.expect(secs < kMaxSolveSeconds, "runtime " + fmt(secs) + "s");
  }
}

void ac2(Check& c) {
  ProblemConfig cfg = config("compartmental_d6.json");
  cfg.refine = false;
  const SolveResult r = run_solve(cfg);
  const PopulationProblem p = build_problem(cfg);
  std::vector<double> equidistant;
  for (int i = 1; i <= 6; ++i) equidistant.push_back(10.0 * i / 6.0);
  for (Estimator est : {Estimator::ols, Estimator::wls}) {
    const std::vector<ExactDesign> starts{r.quantile_design, ExactDesign(equidistant, p.domain),
                                          ExactDesign(design("xi6a.json"), p.domain)};
    const RefineResult ref = exact_optimum(p, starts, est, cfg.refine_simplex);
    const double eq = efficiency_against(p, equidistant, ref, est);
    const double q = efficiency_against(p, r.quantile_design.points(), ref, est);
    const std::string name(estimator_name(est));
    c.expect(eq >= kEquidistantLo && eq <= kEquidistantHi, name + " equidistant " + fmt(eq));
    c.expect(q >= kQuantileMin, name + " quantile " + fmt(q));
  }
}

struct CaseStudy {
  PopulationProblem problem;
  ProblemConfig cfg;
  ExactDesign quantile;
  RefineResult ols;
  RefineResult wls;
};

CaseStudy case_study(const char* file, const char* clinical, const char* equidistant,
                     const char* extra) {
  ProblemConfig cfg = config(file);
  cfg.refine = false;
  const SolveResult r = run_solve(cfg);
  const PopulationProblem p = build_problem(cfg);
  std::vector<ExactDesign> starts{r.quantile_design, r.uniform_design,
                                  ExactDesign(design(clinical), p.domain),
                                  ExactDesign(design(equidistant), p.domain)};
  if (extra) starts.emplace_back(design(extra), p.domain);
  return {p, cfg, r.quantile_design,
          exact_optimum(p, starts, Estimator::ols, cfg.refine_simplex),
          exact_optimum(p, starts, Estimator::wls, cfg.refine_simplex)};
}

const CaseStudy& uzara() {
  static const CaseStudy s =
      case_study("uzara_auc.json", "uzara_clinical.json", "uzara_equidistant.json", nullptr);
  return s;
}

const CaseStudy& lanicor() {
  static const CaseStudy s = case_study("lanicor_auc.json", "lanicor_clinical.json",
                                        "lanicor_equidistant.json", "lanicor_published.json");
  return s;
}

void ac3(Check& c) {
  const CaseStudy& u = uzara();
  const CaseStudy& l = lanicor();
  const auto eff = [](const CaseStudy& s, const std::vector<double>& pts, Estimator est) {
    return efficiency_against(s.problem, pts, est == Estimator::ols ? s.ols : s.wls, est);
  };
  const double uq = eff(u, u.quantile.points(), Estimator::ols);
  const double lq = eff(l, l.quantile.points(), Estimator::ols);
  const double uc = eff(u, design("uzara_clinical.json"), Estimator::ols);
  const double lc = eff(l, design("lanicor_clinical.json"), Estimator::ols);
  const double ue = eff(u, design("uzara_equidistant.json"), Estimator::ols);
  const double le = eff(l, design("lanicor_equidistant.json"), Estimator::ols);
  const double uw = eff(u, u.quantile.points(), Estimator::wls);
  const double lw = eff(l, l.quantile.points(), Estimator::wls);
  c.expect(uq >= kUzaraQuantileMin, "Uzara quantile " + fmt(uq));
  c.expect(lq >= kLanicorQuantileMin, "Lanicor quantile " + fmt(lq));
  c.expect(std::abs(uc - 0.96) <= kClinicalTol, "Uzara clinical " + fmt(uc));
  c.expect(std::abs(lc - 0.92) <= kClinicalTol, "Lanicor clinical " + fmt(lc));
  c.expect(std::abs(le - 0.41) <= kLanicorEquidistantTol, "Lanicor equidistant " + fmt(le));
  c.expect(std::abs(ue - 0.97) <= kUzaraEquidistantTol, "Uzara equidistant " + fmt(ue));
  c.expect(uw >= uq - kWlsSlack, "Uzara WLS quantile " + fmt(uw));
  c.expect(lw >= lq - kWlsSlack, "Lanicor WLS quantile " + fmt(lw));
}

void ac4(Check& c) {
  const auto& pts = lanicor().quantile.points();
  const auto printed = design("lanicor_published.json");
  int below = 0;
  for (double t : pts) below += t < kShapeCutoff;
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    worst = std::max(worst, std::abs(pts[i] - printed[i]));
  }
  c.expect(pts.size() == 14, "size " + std::to_string(pts.size()));
  c.expect(below == 13, std::to_string(below) + " points below 6");
  c.expect(std::abs(pts.back() - 36.0) <= kShapeTol, "last " + fmt(pts.back()));
  c.expect(worst <= kShapeTol, "max interior dev " + fmt(worst));
}

void ac5(Check& c) {
  // The design is computed under a wrong lambda and judged under the true one.
  const CaseStudy& l = lanicor();
  const double base = efficiency_against(l.problem, l.quantile.points(), l.ols, Estimator::ols);
  for (double factor : {0.5, 1.5}) {
    ProblemConfig guess = l.cfg;
    guess.correlation.lambda *= factor;
    const SolveResult r = run_solve(guess);
    const double e = efficiency_against(l.problem, r.quantile_design.points(), l.ols, Estimator::ols);
    c.expect(std::abs(e - base) < kRobustnessMax,
             "lambda x" + fmt(factor) + " eff " + fmt(e) + " vs " + fmt(base));
  }
}

void ac6(Check& c) {
  const ProblemConfig cfg = config("compartmental_d.json");
  const std::vector<SensitivityAxis> box{{0, 0.7, 1.3}, {1, 0.35, 0.65}};
  const auto nodes = run_sensitivity(cfg, design("xi4a.json"), box, 5);
  double lo = 2.0;
  bool all_ok = true;
  for (const auto& n : nodes) {
    all_ok = all_ok && n.ok;
    if (n.ok) lo = std::min(lo, n.efficiency);
  }
  c.expect(all_ok && nodes.size() == 25, "25 nodes evaluated");
  c.expect(lo > kSensitivityMin, "min efficiency " + fmt(lo));

  const PopulationProblem p = build_problem(cfg);
  const RefineResult opt = refine_exact_design(p, ExactDesign(design("xi4a.json"), p.domain),
                                               cfg.estimator, cfg.refine_simplex);
  const auto own = run_sensitivity(cfg, opt.design.points(), box, 5);
  const double centre = own[12].efficiency;
  c.expect(own[12].ok && std::abs(centre - 1.0) <= kSelfEfficiencyTol,
           "optimum at beta0 " + fmt(centre));
}

void ac7(Check& c) {
  // Constant-density identity.
  double identity = 0.0;
  {
    PopulationProblem p;
    p.model = builtin_model("compartmental-fo");
    p.noise = make_noise(0.01);
    p.corr.gamma = 0.6;
    p.corr.lambda = 0.2;
    p.pop.beta0 = Vector(2);
    p.pop.beta0 << 1.0, 0.5;
    p.pop.vp = Matrix::Zero(2, 2);
    p.domain = {0.0, 10.0};
    const PolyDensity u = PolyDensity::uniform(p.domain);
    const Matrix w = moment_matrix_W(u, p.model, p.noise, p.pop.beta0);
    const Matrix expected = 0.01 * (1.0 + 1.2 * q_function(p.corr, 10.0)) * w.inverse();
    identity = (asymptotic_covariance_V(u, p) - expected).cwiseAbs().maxCoeff() /
               expected.cwiseAbs().maxCoeff();
  }
  c.expect(identity <= kIdentityTol, "constant-density identity " + fmt(identity));

  // Closed-form Q against the series.
  double series = 0.0;
  for (double lambda : {0.01, 0.2, 1.0, 5.0}) {
    for (double t : {0.1, 1.0, 10.0}) {
      CorrelationSpec k;
      k.lambda = lambda;
      double sum = 0.0;
      for (long j = 1;; ++j) {
        const double term = std::exp(-lambda * t * static_cast<double>(j));
        sum += term;
        if (term < 1e-18 * sum) break;
      }
      series = std::max(series, std::abs(q_function(k, t) - sum) / std::max(1.0, sum));
    }
  }
  c.expect(series <= kSeriesTol, "Q series " + fmt(series));

  // Gradients against central differences.
  double grad = 0.0;
  {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> t_dist(0.0, 10.0);
    std::uniform_real_distribution<double> rate(0.05, 2.0);
    for (int i = 0; i < 100; ++i) {
      Vector b2(2), b3(3);
      b2 << rate(rng), rate(rng) + 2.1;
      b3 << rate(rng), rate(rng) + 2.1, 10.0 * rate(rng);
      const double t = t_dist(rng);
      for (const auto& [name, b] : {std::pair<const char*, Vector>{"compartmental-fo", b2},
                                    {"exp-elimination", b2}, {"bateman3", b3}}) {
        const ModelSpec m = builtin_model(name);
        const Vector fd = finite_difference_gradient(m, t, b);
        grad = std::max(grad, (m.grad(t, b) - fd).cwiseAbs().maxCoeff() /
                                  (1.0 + fd.cwiseAbs().maxCoeff()));
      }
    }
  }
  c.expect(grad <= kGradientTol, "gradients " + fmt(grad));

  // Gauss-Markov ordering.
  double loewner = 0.0;
  {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 100; ++trial) {
      const int p = 1 + trial % 3;
      const int n = p + 1 + trial % 4;
      Matrix x(n, p), a(n, n), bvp(p, p);
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < p; ++k) x(i, k) = z(rng);
        for (int k = 0; k < n; ++k) a(i, k) = z(rng);
      }
      for (int i = 0; i < p; ++i) {
        for (int k = 0; k < p; ++k) bvp(i, k) = z(rng);
      }
      const Matrix v = a * a.transpose() / n + 0.1 * Matrix::Identity(n, n);
      const Matrix vp = bvp * bvp.transpose() * 0.5;
      const Matrix diff = ols_covariance(x, v, vp).cov - wls_covariance(x, v, vp).cov;
      loewner = std::min(loewner, min_eigenvalue(diff));
    }
  }
  c.expect(loewner >= -kLoewnerTol, "OLS - WLS min eigenvalue " + fmt(loewner));

  // Monte-Carlo covariance.
  const ValidationReport mc =
      run_validation(config("constant_validate.json"), design("constant_pair.json"), 200000, 1);
  c.expect(mc.relative_error <= kMonteCarloTol, "Monte-Carlo error " + fmt(mc.relative_error));

  // Quantile inverse.
  double inverse = 0.0;
  {
    Vector s(5);
    s << 1.0, -0.4, 0.8, 0.3, -0.5;
    const PolyDensity phi = PolyDensity::from_scaled(s, {0.0, 10.0});
    for (int i = 0; i <= 100; ++i) {
      const double u = i / 100.0;
      inverse = std::max(inverse, std::abs(phi.cdf(phi.quantile(u)) - u));
    }
  }
  c.expect(inverse <= kInverseTol, "quantile inverse " + fmt(inverse));
}

void ac8(Check& c) {
  const ProblemConfig base = config("example1_quadratic.json");
  const std::pair<double, double> flat[] = {{0.999, 0.2}, {0.6, 0.01}};
  for (const auto& [gamma, lambda] : flat) {
    ProblemConfig cfg = base;
    cfg.correlation.gamma = gamma;
    cfg.correlation.lambda = lambda;
    const DensityOptimum opt = optimize_density(build_problem(cfg), density_options(cfg));
    const double gap = std::abs(opt.criterion - opt.uniform_criterion) / opt.uniform_criterion;
    c.expect(gap <= kFlatCriterionTol,
             "gamma " + fmt(gamma) + " lambda " + fmt(lambda) + " gap " + fmt(gap));
  }

  ProblemConfig cfg = base;
  cfg.correlation.gamma = 0.01;
  cfg.correlation.lambda = 5.0;
  const SolveResult r = run_solve(cfg);
  const auto& pts = r.refined->design.points();
  bool clustered = true;
  for (double target : {-1.0, 0.0, 1.0}) {
    int close = 0;
    for (double t : pts) close += std::abs(t - target) <= kClusterRadius;
    clustered = clustered && close >= 2;
  }
  c.expect(clustered, "refined " + fmt_points(pts));
}

}  // namespace

int main() {
  bool ok = true;
  ok &= run("AC1", ac1);
  ok &= run("AC2", ac2);
  ok &= run("AC3", ac3);
  ok &= run("AC4", ac4);
  ok &= run("AC5", ac5);
  ok &= run("AC6", ac6);
  ok &= run("AC7", ac7);
  ok &= run("AC8", ac8);
  return ok ? 0 : 1;
}
