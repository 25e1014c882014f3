#include "odeng/nelder_mead.hpp"

#include "odeng/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

namespace odeng {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& objective, const Vector& x) {
  const double v = objective(x);
  return std::isfinite(v) ? v : kInf;
}

struct Coefficients {
  double reflection, expansion, contraction, shrink;
};

Coefficients coefficients(const SimplexConfig& config, Eigen::Index dim) {
  if (!config.adaptive) {
    return {config.reflection, config.expansion, config.contraction, config.shrink};
  }
  const double n = static_cast<double>(std::max<Eigen::Index>(dim, 1));
  return {1.0, 1.0 + 2.0 / n, 0.75 - 0.5 / n, 1.0 - 1.0 / n};
}

struct Run {
  Vector x;
  double value;
  int iterations;
  bool converged;
};

Run simplex_run(const Objective& objective, const Vector& x0, double f0,
                const SimplexConfig& config, int budget) {
  const Eigen::Index n = x0.size();
  const Coefficients c = coefficients(config, n);
  std::vector<Vector> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> vals(static_cast<std::size_t>(n + 1), f0);
  for (Eigen::Index k = 0; k < n; ++k) {
    auto& p = pts[static_cast<std::size_t>(k + 1)];
    p(k) += config.initial_step * std::max(1.0, std::abs(x0(k)));
    vals[static_cast<std::size_t>(k + 1)] = safe_eval(objective, p);
  }

  std::vector<std::size_t> order(pts.size());
  int iter = 0;
  bool converged = false;
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    double diameter = 0.0;
    for (const auto& p : pts) diameter = std::max(diameter, (p - pts[best]).cwiseAbs().maxCoeff());
    const double x_scale = std::max(1.0, pts[best].cwiseAbs().maxCoeff());
    const double spread = vals[worst] - vals[best];
    if (diameter < config.x_tol * x_scale) {
      converged = true;
      break;
    }
    if (std::isfinite(spread) && spread < config.f_tol) {
      // Equal values on both sides of a minimum are not a flat simplex.
      Vector mid = Vector::Zero(n);
      for (const auto& p : pts) mid += p;
      mid /= static_cast<double>(n + 1);
      if (!(safe_eval(objective, mid) < vals[best] - config.f_tol)) {
        converged = true;
        break;
      }
    }
    if (iter >= budget) break;
    ++iter;

    Vector centroid = Vector::Zero(n);
    for (std::size_t i : order) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= static_cast<double>(n);

    const Vector xr = centroid + c.reflection * (centroid - pts[worst]);
    const double fr = safe_eval(objective, xr);
    if (fr < vals[best]) {
      const Vector xe = centroid + c.expansion * (xr - centroid);
      const double fe = safe_eval(objective, xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    if (fr < vals[worst]) {
      const Vector xc = centroid + c.contraction * (xr - centroid);
      const double fc = safe_eval(objective, xc);
      if (fc <= fr) {
        pts[worst] = xc;
        vals[worst] = fc;
        continue;
      }
    } else {
      const Vector xc = centroid + c.contraction * (pts[worst] - centroid);
      const double fc = safe_eval(objective, xc);
      if (fc < vals[worst]) {
        pts[worst] = xc;
        vals[worst] = fc;
        continue;
      }
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + c.shrink * (pts[i] - pts[best]);
      vals[i] = safe_eval(objective, pts[i]);
    }
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], iter, converged};
}

}  // namespace

void SimplexConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& what) {
    throw ValidationError(what, "optimizer." + key);
  };
  if (!(reflection > 0.0)) fail("reflection", "must be > 0");
  if (!(expansion > 1.0)) fail("expansion", "must be > 1");
  if (!(contraction > 0.0 && contraction < 1.0)) fail("contraction", "must lie in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0)) fail("shrink", "must lie in (0, 1)");
  if (max_iter < 1) fail("max_iter", "must be >= 1");
  if (!(f_tol >= 0.0)) fail("f_tol", "must be >= 0");
  if (!(x_tol >= 0.0)) fail("x_tol", "must be >= 0");
  if (!(initial_step > 0.0)) fail("initial_step", "must be > 0");
  if (max_restarts < 0) fail("max_restarts", "must be >= 0");
}

OptimResult nelder_mead(const Objective& objective, const Vector& x0,
                        const SimplexConfig& config) {
  config.validate();
  if (x0.size() == 0) throw ValidationError("starting point is empty");
  const double f0 = objective(x0);
  if (!std::isfinite(f0)) {
    std::ostringstream msg;
    msg << "objective is not finite at the starting point (value " << f0 << ")";
    throw ValidationError(msg.str());
  }

  OptimResult result;
  Run run = simplex_run(objective, x0, f0, config, config.max_iter);
  result.x = run.x;
  result.value = run.value;
  result.iterations = run.iterations;
  result.converged = run.converged;
  for (int r = 0; r < config.max_restarts; ++r) {
    Run again = simplex_run(objective, result.x, result.value, config, config.max_iter);
    result.iterations += again.iterations;
    if (!(again.value < result.value)) {
      result.converged = result.converged || again.converged;
      break;
    }
    result.x = again.x;
    result.value = again.value;
    result.converged = again.converged;
    result.restarts_used = r + 1;
  }
  return result;
}

}  // namespace odeng
