#include <doctest.h>

#include <cmath>

#include "rdshift/errors.hpp"
#include "rdshift/numerics.hpp"
#include "rdshift/pode.hpp"

using namespace rdshift;

TEST_SUITE_BEGIN("pode");

TEST_CASE("integrate_scalar: logistic closed form") {
  auto h = [](double, double u) { return 1.0 - u; };
  const double u1 = pode::integrate_scalar(h, 0.0, 1.0, 0.5);
  CHECK(u1 == doctest::Approx(0.731058578630004879).epsilon(1e-11));
  CHECK(pode::displacement(h, 1.0, 0.5) ==
        doctest::Approx(0.231058578630004879).epsilon(1e-10));
}

TEST_CASE("solve_periodic_orbit: autonomous logistic locks onto u = 1") {
  auto orbit = pode::solve_periodic_orbit(
      [](double, double u) { return 1.0 - u; }, 1.0);
  CHECK(orbit.residual <= orbit.tol);
  for (double v : orbit.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("solve_periodic_orbit: seasonal orbit matches the integrating-factor value") {
  // u' = u (1 + 0.5 sin(2 pi t) - u): 1/u solves a linear equation whose
  // periodic solution is a ratio of quadratures; values below were computed
  // from that closed form at 30 digits.
  auto h = [](double t, double u) {
    return 1.0 + 0.5 * std::sin(2 * num::pi * t) - u;
  };
  auto orbit = pode::solve_periodic_orbit(h, 1.0);
  CHECK(orbit.residual <= orbit.tol);
  CHECK(orbit.value_at(0.0) == doctest::Approx(0.923851808405250556).epsilon(1e-9));
  CHECK(orbit.value_at(0.25) == doctest::Approx(1.010904758653874606).epsilon(1e-9));
  CHECK(orbit.value_at(0.5) == doctest::Approx(1.078986873529719351).epsilon(1e-9));
  CHECK(orbit.value_at(0.75) == doctest::Approx(0.986256774601908410).epsilon(1e-9));
  // interpolation is periodic
  CHECK(orbit.value_at(1.25) == doctest::Approx(orbit.value_at(0.25)).epsilon(1e-12));
}

TEST_CASE("orbit comparison: lowering h lowers the orbit pointwise") {
  auto h = [](double t, double u) {
    return 1.0 + 0.5 * std::sin(2 * num::pi * t) - u;
  };
  const double gamma = 0.25;
  auto hg = [h, gamma](double t, double u) { return h(t, u) - gamma; };
  auto a = pode::solve_periodic_orbit(h, 1.0);
  auto b = pode::solve_periodic_orbit(hg, 1.0);
  REQUIRE(a.values.size() == b.values.size());
  for (size_t j = 0; j < a.values.size(); ++j) {
    CHECK(b.values[j] <= a.values[j] + 1e-10);
    CHECK(b.values[j] > 0);
  }
}

TEST_CASE("global attraction of the orbit from above and below") {
  auto h = [](double t, double u) {
    return 1.0 + 0.5 * std::sin(2 * num::pi * t) - u;
  };
  auto orbit = pode::solve_periodic_orbit(h, 1.0);
  double lo = 0.1 * orbit.value_at(0.0), hi = 10.0 * orbit.value_at(0.0);
  for (int k = 0; k < 25; ++k) {
    lo = pode::integrate_scalar(h, 0, 1, lo);
    hi = pode::integrate_scalar(h, 0, 1, hi);
  }
  CHECK(std::abs(lo - orbit.value_at(0.0)) < 1e-6);
  CHECK(std::abs(hi - orbit.value_at(0.0)) < 1e-6);
}

TEST_CASE("orbit solver error reporting") {
  // mean growth at 0 is negative: no positive orbit, no sign change
  CHECK_THROWS_AS(pode::solve_periodic_orbit(
                      [](double, double u) { return -1.0 - u; }, 1.0),
                  NoSignChange);
  // h increasing in u violates the monotone hypothesis
  CHECK_THROWS_AS(pode::solve_periodic_orbit(
                      [](double, double u) { return 0.5 + u; }, 1.0),
                  AssumptionViolation);
}

TEST_CASE("periodic_weight: sine coefficient and zero-mean guard") {
  auto p = pode::periodic_weight(
      [](double t) { return std::sin(2 * num::pi * t); }, 1.0);
  CHECK(p.value_at(0.5) == doctest::Approx(1.374802227439358632).epsilon(1e-10));
  CHECK(p.value_at(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.residual < 1e-12);
  CHECK(p.min_value() > 0);
  CHECK_THROWS_AS(pode::periodic_weight([](double) { return 1.0; }, 1.0),
                  NotZeroMean);
}

TEST_CASE("linear_periodic_solution: constant and oscillatory closed forms") {
  // v' = -v + 1 -> v == 1
  auto v = pode::linear_periodic_solution([](double) { return -1.0; },
                                          [](double) { return 1.0; }, 1.0);
  for (double x : v.values) CHECK(x == doctest::Approx(1.0).epsilon(1e-10));
  // v' = -v + cos(2 pi t) -> v = (cos + 2 pi sin)/(1 + 4 pi^2)
  auto w = pode::linear_periodic_solution(
      [](double) { return -1.0; },
      [](double t) { return std::cos(2 * num::pi * t); }, 1.0);
  const double den = 1.0 + 4.0 * num::pi * num::pi;
  for (int j = 0; j <= w.mesh(); ++j) {
    const double t = static_cast<double>(j) / w.mesh();
    const double exact =
        (std::cos(2 * num::pi * t) + 2 * num::pi * std::sin(2 * num::pi * t)) / den;
    CHECK(w.values[static_cast<size_t>(j)] == doctest::Approx(exact).epsilon(1e-9));
  }
  // positive-mean coefficient with negative forcing also has a positive
  // periodic solution (used by the stability pair construction)
  auto z = pode::linear_periodic_solution([](double) { return 0.7; },
                                          [](double) { return -0.3; }, 1.0);
  for (double x : z.values) CHECK(x == doctest::Approx(0.3 / 0.7).epsilon(1e-9));
  CHECK_THROWS_AS(
      pode::linear_periodic_solution([](double t) { return std::sin(2 * num::pi * t); },
                                     [](double) { return 1.0; }, 1.0),
      InvalidArgument);
}

TEST_SUITE_END();
