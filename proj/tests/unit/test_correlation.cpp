#include "doctest.h"

#include "odeng/correlation.hpp"
#include "odeng/error.hpp"

#include <cmath>

using namespace odeng;

namespace {

CorrelationSpec exponential(double lambda) {
  CorrelationSpec c;
  c.kernel = Kernel::exponential;
  c.lambda = lambda;
  return c;
}

}  // namespace

TEST_CASE("kernel values") {
  CHECK(rho(exponential(1.0), 0.0) == 1.0);
  CHECK(rho(exponential(1.2), 1.0) == doctest::Approx(0.301194).epsilon(1e-6));
  CorrelationSpec g = exponential(0.5);
  g.kernel = Kernel::gaussian;
  CHECK(rho(g, 2.0) == doctest::Approx(0.135335).epsilon(1e-6));
  CHECK(rho(g, -2.0) == rho(g, 2.0));
}

TEST_CASE("scaled correlation") {
  CorrelationSpec c = exponential(1.0);
  c.scale = 10.0;
  CHECK(r_scaled(c, 0.1) == doctest::Approx(std::exp(-1.0)));
  CHECK(r_scaled(c, 0.0) == 1.0);
  CorrelationSpec d = exponential(0.05);
  d.scale = 14.0;
  CHECK(r_scaled(d, 2.0) == doctest::Approx(0.246597).epsilon(1e-6));
  CHECK(r_scaled(d, -2.0) == r_scaled(d, 2.0));
}

TEST_CASE("Q function") {
  CHECK(q_function(exponential(1.0), 1.0) == doctest::Approx(0.581977).epsilon(1e-6));
  CHECK(q_function(exponential(0.2), 1.0) == doctest::Approx(4.516656).epsilon(1e-6));
  CorrelationSpec g = exponential(1.0);
  g.kernel = Kernel::gaussian;
  double oracle = 0.0;
  for (int j = 1; j < 20; ++j) oracle += std::exp(-4.0 * j * j);
  CHECK(q_function(g, 2.0) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(q_function(g, 2.0) == doctest::Approx(0.01831575).epsilon(1e-6));
  CHECK(q_function(exponential(1.0), INFINITY) == 0.0);
  CHECK_THROWS_AS(q_function(exponential(1.0), 0.0), DomainError);
  CHECK_THROWS_AS(q_function(exponential(1.0), -1.0), DomainError);
}

TEST_CASE("exponential closed form equals the truncated series") {
  for (double lambda : {0.01, 0.1, 1.0, 5.0}) {
    for (double t : {0.05, 0.5, 2.0, 10.0, 50.0}) {
      double sum = 0.0;
      for (long j = 1;; ++j) {
        const double term = std::exp(-lambda * t * static_cast<double>(j));
        sum += term;
        if (term < 1e-18 * sum || j > 100000) break;
      }
      const double q = q_function(exponential(lambda), t);
      CHECK(std::abs(q - sum) <= 1e-10 * std::max(1.0, sum));
    }
  }
}

TEST_CASE("Q is nonincreasing and vanishes at infinity") {
  for (Kernel k : {Kernel::exponential, Kernel::gaussian}) {
    CorrelationSpec c = exponential(0.7);
    c.kernel = k;
    double prev = q_function(c, 0.05);
    for (double t = 0.1; t < 20.0; t += 0.1) {
      const double q = q_function(c, t);
      CHECK(q <= prev);
      prev = q;
    }
    CHECK(q_function(c, 1e6 / c.lambda) < 1e-12);
  }
}

TEST_CASE("table kernel") {
  CorrelationSpec c;
  c.kernel = Kernel::table;
  c.table = {{0.0, 1.0}, {1.0, 0.5}, {2.0, 0.0}};
  c.validate();
  CHECK(rho(c, 0.5) == doctest::Approx(0.75));
  CHECK(rho(c, 3.0) == 0.0);
  CHECK(q_function(c, 0.5) == doctest::Approx(0.75 + 0.5 + 0.25));
  const CorrelationSpec slow = c.with_time_factor(0.5);
  CHECK(rho(slow, 2.0) == doctest::Approx(rho(c, 1.0)));
}

TEST_CASE("correlation validation names the key") {
  CorrelationSpec c = exponential(1.0);
  c.gamma = 1.5;
  try {
    c.validate();
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.key() == "correlation.gamma");
  }
  c.gamma = 0.5;
  c.lambda = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK_THROWS_AS(parse_kernel("matern"), ValidationError);
}
