#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace odeng {

enum class Kernel { exponential, gaussian, table };

std::string_view kernel_name(Kernel kernel);
Kernel parse_kernel(std::string_view name);

// Within-subject correlation: errors at t_j, t_s correlate as
// gamma * rho(scale * |t_j - t_s|) + (1 - gamma) * delta_js.
struct CorrelationSpec {
  Kernel kernel = Kernel::exponential;
  double gamma = 0.0;
  double lambda = 1.0;
  // Multiplier n in r_n(t) = rho(n t). Unset means "size of the design being
  // evaluated".
  std::optional<double> scale;
  // Kernel::table only: (t, rho) knots, linear interpolation, rho = 0 past the
  // last knot. Must start at (0, 1) and be nonincreasing.
  std::vector<std::pair<double, double>> table;

  // Throws ValidationError naming the offending `correlation.*` key.
  void validate() const;

  // Kernel rho'(t) = rho(factor * t).
  CorrelationSpec with_time_factor(double factor) const;
};

double rho(const CorrelationSpec& spec, double t);

// rho(scale * |dt|); requires spec.scale.
double r_scaled(const CorrelationSpec& spec, double dt);

// Q(t) = sum_{j>=1} rho(j t) for t > 0, Q(+inf) = 0. Exponential kernels use
// the closed form 1 / (exp(lambda t) - 1); other kernels are summed until the
// term drops below 1e-12 (1 + partial sum), capped at 1e7 terms.
double q_function(const CorrelationSpec& spec, double t);

}  // namespace odeng
