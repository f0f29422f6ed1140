#include <doctest.h>

#include <cmath>
#include <vector>

#include "rdshift/errors.hpp"
#include "rdshift/numerics.hpp"

using namespace rdshift;

TEST_SUITE_BEGIN("numerics");

TEST_CASE("integrate: smooth closed forms") {
  auto f = [](double t) { return std::sin(2 * num::pi * t); };
  CHECK(std::abs(num::integrate(f, 0, 1)) < 1e-14);
  CHECK(num::integrate([](double x) { return std::exp(-x); }, -1, 1) ==
        doctest::Approx(std::exp(1.0) - std::exp(-1.0)).epsilon(1e-13));
  CHECK(num::mean_over_period(
            [](double t) { return 1.0 + 0.5 * std::sin(2 * num::pi * t); }, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("cumulative_integral matches antiderivative at mesh points") {
  const int m = 64;
  auto cum = num::cumulative_integral(
      [](double t) { return std::sin(2 * num::pi * t); }, 1.0, m);
  REQUIRE(cum.size() == m + 1);
  for (int j = 0; j <= m; ++j) {
    const double t = static_cast<double>(j) / m;
    const double exact = (1.0 - std::cos(2 * num::pi * t)) / (2 * num::pi);
    CHECK(std::abs(cum[static_cast<size_t>(j)] - exact) < 1e-13);
  }
}

TEST_CASE("bisect finds roots and reports missing sign changes") {
  auto r = num::bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-12, 1e-12);
  CHECK(r.root == doctest::Approx(std::sqrt(2.0)).epsilon(1e-11));
  CHECK_THROWS_AS(num::bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0,
                              1e-10, 1e-10),
                  NoSignChange);
}

TEST_CASE("periodic_cubic reproduces smooth periodic samples") {
  const int m = 64;
  std::vector<double> samples(m);
  for (int j = 0; j < m; ++j)
    samples[static_cast<size_t>(j)] = std::sin(2 * num::pi * j / m);
  // worst-case interior points + periodic wrap
  double worst = 0;
  for (int k = 0; k < 257; ++k) {
    const double t = -1.0 + 3.0 * k / 256.0;  // spans negative and > T args
    const double got = num::periodic_cubic(samples, 1.0, t);
    worst = std::max(worst, std::abs(got - std::sin(2 * num::pi * t)));
  }
  CHECK(worst < 5e-5);  // Catmull-Rom is O(h^3); measured ~1.5e-5 at m=64
  // exact at the mesh nodes themselves
  CHECK(num::periodic_cubic(samples, 1.0, 5.0 / m) ==
        doctest::Approx(samples[5]).epsilon(1e-15));
}

TEST_CASE("lerp_uniform interior and fills") {
  std::vector<double> v = {0.0, 1.0, 4.0};
  CHECK(num::lerp_uniform(v, 0.0, 1.0, 0.5, -7, 7) == doctest::Approx(0.5));
  CHECK(num::lerp_uniform(v, 0.0, 1.0, 1.75, -7, 7) == doctest::Approx(3.25));
  CHECK(num::lerp_uniform(v, 0.0, 1.0, -0.1, -7, 7) == -7.0);
  CHECK(num::lerp_uniform(v, 0.0, 1.0, 2.1, -7, 7) == 7.0);
}

TEST_CASE("lsq3 recovers a planted model") {
  std::vector<double> t, lnt, one, y;
  for (int k = 5; k < 60; ++k) {
    const double tk = k;
    t.push_back(tk);
    lnt.push_back(-std::log(tk));
    one.push_back(1.0);
    y.push_back(2.0 * tk - 1.5 * (-std::log(tk)) * (-1.0) + 0.25);
    // y = 2 t - 1.5 ln t + 0.25, with basis (t, -ln t, 1) => coeffs (2, 1.5, 0.25)
  }
  double rms = 1;
  auto c = num::lsq3(t, lnt, one, y, &rms);
  CHECK(c[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c[1] == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(c[2] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(rms < 1e-10);
}

TEST_CASE("frac is exactly periodic") {
  CHECK(num::frac(1.25) == 0.25);
  CHECK(num::frac(-0.25) == 0.75);
  CHECK(num::frac(3.0) == 0.0);
}

TEST_SUITE_END();
