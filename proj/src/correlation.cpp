#include "odeng/correlation.hpp"

#include "odeng/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace odeng {

namespace {

constexpr long kMaxSeriesTerms = 10'000'000;
constexpr double kSeriesTolerance = 1e-12;

double table_rho(const std::vector<std::pair<double, double>>& table, double t) {
  if (table.empty()) return t == 0.0 ? 1.0 : 0.0;
  if (t >= table.back().first) return t == table.back().first ? table.back().second : 0.0;
  const auto upper = std::upper_bound(table.begin(), table.end(), t,
                                      [](double x, const auto& knot) { return x < knot.first; });
  const auto lower = std::prev(upper);
  const double w = (t - lower->first) / (upper->first - lower->first);
  return lower->second + w * (upper->second - lower->second);
}

}  // namespace

std::string_view kernel_name(Kernel kernel) {
  switch (kernel) {
    case Kernel::exponential: return "exponential";
    case Kernel::gaussian: return "gaussian";
    case Kernel::table: return "table";
  }
  return "unknown";
}

Kernel parse_kernel(std::string_view name) {
  if (name == "exponential") return Kernel::exponential;
  if (name == "gaussian") return Kernel::gaussian;
  if (name == "table") return Kernel::table;
  throw ValidationError("unknown kernel '" + std::string(name) + "'", "correlation.kernel");
}

void CorrelationSpec::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    std::ostringstream msg;
    msg << "must lie in [0, 1], got " << gamma;
    throw ValidationError(msg.str(), "correlation.gamma");
  }
  if (kernel != Kernel::table && !(lambda > 0.0 && std::isfinite(lambda))) {
    std::ostringstream msg;
    msg << "must be positive, got " << lambda;
    throw ValidationError(msg.str(), "correlation.lambda");
  }
  if (scale && !(*scale > 0.0 && std::isfinite(*scale))) {
    throw ValidationError("must be positive", "correlation.scale");
  }
  if (kernel == Kernel::table) {
    if (table.size() < 2) throw ValidationError("needs at least two knots", "correlation.table");
    if (table.front().first != 0.0 || table.front().second != 1.0) {
      throw ValidationError("first knot must be (0, 1)", "correlation.table");
    }
    for (std::size_t i = 1; i < table.size(); ++i) {
      if (!(table[i].first > table[i - 1].first)) {
        throw ValidationError("knot times must be strictly increasing", "correlation.table");
      }
      if (!(table[i].second <= table[i - 1].second) || table[i].second < 0.0) {
        throw ValidationError("values must be nonincreasing and within [0, 1]",
                              "correlation.table");
      }
    }
  }
}

CorrelationSpec CorrelationSpec::with_time_factor(double factor) const {
  CorrelationSpec out = *this;
  switch (kernel) {
    case Kernel::exponential: out.lambda = lambda * factor; break;
    case Kernel::gaussian: out.lambda = lambda * factor * factor; break;
    case Kernel::table:
      for (auto& knot : out.table) knot.first /= factor;
      break;
  }
  return out;
}

double rho(const CorrelationSpec& spec, double t) {
  const double a = std::abs(t);
  switch (spec.kernel) {
    case Kernel::exponential: return std::exp(-spec.lambda * a);
    case Kernel::gaussian: return std::exp(-spec.lambda * a * a);
    case Kernel::table: return table_rho(spec.table, a);
  }
  return 0.0;
}

double r_scaled(const CorrelationSpec& spec, double dt) {
  if (!spec.scale) throw ValidationError("scale is not set", "correlation.scale");
  return rho(spec, *spec.scale * std::abs(dt));
}

double q_function(const CorrelationSpec& spec, double t) {
  if (std::isinf(t) && t > 0.0) return 0.0;
  if (!(t > 0.0)) {
    std::ostringstream msg;
    msg << "Q(t) requires t > 0, got " << t;
    throw DomainError(msg.str());
  }
  if (spec.kernel == Kernel::exponential) return 1.0 / std::expm1(spec.lambda * t);

  double sum = 0.0;
  for (long j = 1; j <= kMaxSeriesTerms; ++j) {
    const double term = rho(spec, static_cast<double>(j) * t);
    sum += term;
    if (term < kSeriesTolerance * (1.0 + sum)) return sum;
  }
  std::ostringstream msg;
  msg << "Q(" << t << ") did not converge within " << kMaxSeriesTerms
      << " terms (partial sum " << sum << ")";
  throw NonConvergenceError(msg.str(), sum);
}

}  // namespace odeng
