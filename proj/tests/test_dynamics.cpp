#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rdshift/dynamics.hpp"
#include "rdshift/env.hpp"
#include "rdshift/errors.hpp"
#include "rdshift/numerics.hpp"
#include "rdshift/pde.hpp"
#include "rdshift/pode.hpp"
#include "rdshift/waves.hpp"

using namespace rdshift;
using dynamics::FrontSide;
using dynamics::InitialData;

TEST_SUITE_BEGIN("dynamics");

namespace {

env::PeriodicEnvironment tanh_env() {
  env::EnvironmentParams p;
  p.kind = env::Kind::tanh_fisher;
  p.seasonal_amp = 0.5;
  return env::build_environment(p);
}

// No x-dependence at all: the flat mode obeys the scalar logistic ODE and
// diffusion is inert, which gives exact references for sup and mass.
env::PeriodicEnvironment flat_env() {
  env::PeriodicEnvironment e;
  e.period = 1.0;
  e.label = "flat";
  e.m_cap = 2.0;
  auto rho = [](double t) { return 1.0 + 0.5 * std::sin(2.0 * num::pi * t); };
  e.g = [rho](double t, double, double u) { return rho(t) - u; };
  e.limit_left = [rho](double t, double u) { return rho(t) - u; };
  e.limit_right = e.limit_left;
  e.base = [rho](double t, double) { return rho(t); };
  e.slope = [](double) { return 1.0; };
  return e;
}

pde::StepperConfig cheap_cfg() {
  pde::StepperConfig cfg;
  cfg.steps_per_period = 256;
  return cfg;
}

const waves::WaveProfile& front_c1() {
  static const waves::WaveProfile w = [] {
    auto e = tanh_env();
    return waves::compute_kpp_wave(e, 1.0, pde::Grid1D{-100.0, 100.0, 2001},
                                   cheap_cfg(), 1e-8);
  }();
  return w;
}

dynamics::FrontTrace synthetic_trace(double c, double gamma, double b,
                                     long periods) {
  dynamics::FrontTrace tr;
  tr.period = 1.0;
  for (long k = 0; k <= periods; ++k) {
    const double t = static_cast<double>(k);
    const double x = t > 0.0 ? c * t - gamma * std::log(t) + b : b;
    tr.t.push_back(t);
    tr.x_right.push_back(x);
    tr.x_left.push_back(-x);
    tr.sup_u.push_back(1.0);
    tr.mass.push_back(0.0);
  }
  return tr;
}

}  // namespace

TEST_CASE("initial data shapes and validation") {
  const auto bump = InitialData::bump(2.0, 1.0, 0.5);
  CHECK(bump(1.0) == 2.0);
  CHECK(bump(1.5) == 2.0);  // the hat is closed at its endpoints
  CHECK(bump(1.6) == 0.0);
  CHECK(bump(0.4) == 0.0);

  const auto peak = InitialData::exp_tail(2.0, 1.0, 0.0);
  CHECK(peak(0.0) == 1.0);
  CHECK(peak(1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(peak(-1.0) == doctest::Approx(peak(1.0)).epsilon(1e-14));

  const auto front = InitialData::front(0.7, 2.0);
  CHECK(front(2.0) == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(front(-30.0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(front(40.0) < 1e-30);

  CHECK(InitialData::constant(0.3)(123.0) == 0.3);

  CHECK_THROWS_AS(InitialData::bump(0.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(InitialData::bump(1.0, 0.0, -1.0).validate(),
                  InvalidArgument);
  CHECK_THROWS_AS(InitialData::exp_tail(-1.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(InitialData::constant(0.0).validate(), InvalidArgument);
}

TEST_CASE("weighted mass matches closed forms") {
  // unit hat, weight e^{-x}: integral e^{-x} on [-1,1] = e - 1/e
  const double hat_exact = std::exp(1.0) - std::exp(-1.0);

  SUBCASE("hat fully inside the grid") {
    const auto ti = dynamics::tail_integral(InitialData::bump(1.0, 0.0, 1.0),
                                            1.0, {-50.0, 50.0, 40001});
    CHECK(ti.finite);
    CHECK(ti.tail_bound == 0.0);
    CHECK(ti.value == doctest::Approx(hat_exact).epsilon(5e-3));
  }

  SUBCASE("hat overhanging the left edge uses the closed-form remainder") {
    const auto ti = dynamics::tail_integral(InitialData::bump(1.0, 0.0, 1.0),
                                            1.0, {0.0, 50.0, 20001});
    CHECK(ti.finite);
    CHECK(ti.tail_bound == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
    CHECK(ti.value == doctest::Approx(hat_exact).epsilon(5e-3));
  }

  SUBCASE("two-sided exponential peak") {
    // e^{-2|x|} e^{-x} integrates to 1/(2-1) + 1/(2+1) = 4/3
    const auto ti = dynamics::tail_integral(InitialData::exp_tail(2.0), 1.0,
                                            {-50.0, 50.0, 40001});
    CHECK(ti.finite);
    CHECK(ti.value == doctest::Approx(4.0 / 3.0).epsilon(1e-4));

    // weight overpowering the left tail: 2 - 2.5 < 0
    const auto div = dynamics::tail_integral(InitialData::exp_tail(2.0), 2.5,
                                             {-50.0, 50.0, 4001});
    CHECK_FALSE(div.finite);
    CHECK(std::isinf(div.tail_bound));
    CHECK(std::isfinite(div.value));  // the grid part is still reported
  }

  SUBCASE("front-like data against a growing weight") {
    // (1 - tanh x)/2 e^{x} dx = pi/2 via y = e^x
    const auto ti = dynamics::tail_integral(InitialData::front(1.0), -1.0,
                                            {-50.0, 50.0, 40001});
    CHECK(ti.finite);
    CHECK(ti.value == doctest::Approx(0.5 * num::pi).epsilon(1e-4));

    // the left plateau diverges against any non-growing weight,
    // the e^{-2x} right tail against weights growing faster than e^{2x}
    CHECK_FALSE(dynamics::tail_integral(InitialData::front(1.0), 0.5,
                                        {-50.0, 50.0, 4001})
                    .finite);
    CHECK_FALSE(dynamics::tail_integral(InitialData::front(1.0), -2.5,
                                        {-50.0, 50.0, 4001})
                    .finite);
  }

  SUBCASE("constant data never has finite weighted mass") {
    CHECK_FALSE(dynamics::tail_integral(InitialData::constant(1.0), 1.0,
                                        {-50.0, 50.0, 4001})
                    .finite);
    CHECK_FALSE(dynamics::tail_integral(InitialData::constant(1.0), 0.0,
                                        {-50.0, 50.0, 4001})
                    .finite);
  }
}

TEST_CASE("front-speed fit recovers a synthetic drift with log correction") {
  const auto tr = synthetic_trace(2.0, 0.5, 1.0, 60);

  const auto fit = dynamics::fit_front_speed(tr, 10.0, 60.0);
  CHECK(fit.c_hat == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.gamma_hat == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.rms < 1e-10);
  CHECK(fit.n_used == 51);

  // mirrored left side reports the same outward speed
  const auto lf = dynamics::fit_front_speed(tr, 10.0, 60.0, FrontSide::left);
  CHECK(lf.c_hat == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(lf.gamma_hat == doctest::Approx(0.5).epsilon(1e-9));

  // a pure line has no log coefficient
  const auto line = synthetic_trace(2.0, 0.0, 0.0, 60);
  const auto lfit = dynamics::fit_front_speed(line, 10.0, 60.0);
  CHECK(lfit.c_hat == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(lfit.gamma_hat) < 1e-10);

  // the default window is the trailing two thirds
  const auto dfit = dynamics::fit_front_speed(tr);
  CHECK(dfit.t1 == doctest::Approx(20.0));
  CHECK(dfit.t2 == doctest::Approx(60.0));
  CHECK(dfit.c_hat == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("front-speed fit guards") {
  const auto tr = synthetic_trace(2.0, 0.5, 1.0, 60);

  // the window must start past the transient
  CHECK_THROWS_AS(dynamics::fit_front_speed(tr, 5.0, 60.0), InvalidArgument);
  CHECK_THROWS_AS(dynamics::fit_front_speed(tr, 30.0, 20.0), InvalidArgument);

  // too few samples inside the window
  CHECK_THROWS_AS(dynamics::fit_front_speed(tr, 10.0, 15.0), InsufficientData);

  // non-finite crossings (level never reached) are skipped, not fitted
  auto gone = tr;
  for (size_t k = 20; k < gone.size(); ++k)
    gone.x_right[k] = -std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(dynamics::fit_front_speed(gone, 10.0, 60.0),
                  InsufficientData);

  dynamics::FrontTrace empty;
  CHECK_THROWS_AS(dynamics::fit_front_speed(empty), InsufficientData);

  // a short trace's default window starts before 10 T
  const auto brief = synthetic_trace(2.0, 0.0, 0.0, 5);
  CHECK_THROWS_AS(dynamics::fit_front_speed(brief), InvalidArgument);
}

TEST_CASE("flat habitat: constant data rides the carrying orbit") {
  const auto e = flat_env();
  const auto alpha = pode::solve_periodic_orbit(
      [&e](double t, double u) { return e.limit_left(t, u); }, e.period);

  const pde::Grid1D grid{-20.0, 20.0, 401};
  const auto res =
      dynamics::run_ivp(e, 0.7, InitialData::constant(alpha.value_at(0.0)),
                        grid, cheap_cfg(), 8);

  // at whole periods the orbit returns to its t = 0 value
  for (size_t k = 0; k < res.trace.size(); ++k)
    CHECK(res.trace.sup_u[k] ==
          doctest::Approx(alpha.value_at(0.0)).epsilon(2e-5));
  // mass = sup * |domain| for an x-constant field
  CHECK(res.trace.mass.back() ==
        doctest::Approx(res.trace.sup_u.back() * 40.0).epsilon(1e-10));
  // the field never develops x-structure
  const auto& v = res.final.values;
  CHECK(*std::max_element(v.begin(), v.end()) -
            *std::min_element(v.begin(), v.end()) <
        1e-12);
  // constant data crosses the level at both walls from the start
  CHECK(res.trace.contaminated);
  CHECK(res.trace.note.find("margin") != std::string::npos);
}

TEST_CASE("flat habitat: the scalar orbit majorizes any bump") {
  const auto e = flat_env();
  auto h = [&e](double t, double u) { return e.limit_left(t, u); };

  const pde::Grid1D grid{-40.0, 40.0, 801};
  const auto res = dynamics::run_ivp(e, 0.0, InitialData::bump(2.0, 0.0, 5.0),
                                     grid, cheap_cfg(), 6);
  for (size_t k = 0; k < res.trace.size(); ++k) {
    const double w =
        pode::integrate_scalar(h, 0.0, res.trace.t[k] + 1e-15, 2.0);
    CHECK(res.trace.sup_u[k] <= w + 1e-8);
  }
  // diffusion genuinely lowers the peak below the ODE envelope
  const double w3 = pode::integrate_scalar(h, 0.0, 3.0, 2.0);
  CHECK(res.trace.sup_u[3] < w3 - 1e-3);
}

TEST_CASE("ordered initial data stay ordered") {
  const auto e = tanh_env();
  const pde::Grid1D grid{-60.0, 60.0, 1201};
  const auto lo = dynamics::run_ivp(e, 1.0, InitialData::bump(0.8, 0.0, 2.0),
                                    grid, cheap_cfg(), 5);
  const auto hi = dynamics::run_ivp(
      e, 1.0, InitialData::exp_tail(0.1, 1.5, 0.0), grid, cheap_cfg(), 5);
  REQUIRE(lo.final.values.size() == hi.final.values.size());
  for (size_t i = 0; i < lo.final.values.size(); ++i)
    CHECK(lo.final.values[i] <= hi.final.values[i] + 1e-12);
  for (size_t k = 0; k < lo.trace.size(); ++k)
    CHECK(lo.trace.sup_u[k] <= hi.trace.sup_u[k] + 1e-12);
}

TEST_CASE("recession beyond critical speed extinguishes compact data") {
  const auto e = tanh_env();
  const auto sd = waves::compute_speed_data(e);
  const auto init = InitialData::bump(1.0, 0.0, 1.0);

  // compact data have finite weighted mass at every rate
  CHECK(dynamics::tail_integral(init, sd.mu_1(-3.0), {-100.0, 100.0, 2001})
            .finite);

  const auto res = dynamics::run_ivp(e, -3.0, init, {-100.0, 100.0, 2001},
                                     cheap_cfg(), 20);
  CHECK(res.trace.sup_u.back() < 1e-3);
  // decay sets in within a few periods and is monotone afterwards
  for (size_t k = 5; k + 1 < res.trace.size(); ++k)
    CHECK(res.trace.sup_u[k + 1] <= res.trace.sup_u[k] + 1e-12);
}

TEST_CASE("spreading flanks both travel at the free speed") {
  const auto e = tanh_env();
  const auto res = dynamics::run_ivp(e, 3.0, InitialData::bump(1.0, 0.0, 1.0),
                                     {-160.0, 160.0, 3201}, cheap_cfg(), 60);
  CHECK_FALSE(res.trace.contaminated);

  const auto right = dynamics::fit_front_speed(res.trace, 20.0, 60.0);
  const auto left =
      dynamics::fit_front_speed(res.trace, 20.0, 60.0, FrontSide::left);
  CHECK(std::abs(right.c_hat - 2.0) < 0.1);  // within 5% of c* = 2
  CHECK(std::abs(left.c_hat - 2.0) < 0.1);
  // the logarithmic delay is present with the right sign on both flanks
  CHECK(right.gamma_hat > 0.2);
  CHECK(left.gamma_hat > 0.2);
  CHECK(right.rms < 0.05);
  CHECK(left.rms < 0.05);
}

TEST_CASE("compact data are attracted to the forced front") {
  const auto e = tanh_env();
  const auto rep = dynamics::wave_attraction_error(
      e, 1.0, InitialData::bump(1.0, 0.0, 1.0), front_c1(),
      {-80.0, 130.0, 2101}, cheap_cfg(), 25.0);

  CHECK(rep.mu == doctest::Approx(1.0).epsilon(1e-10));
  REQUIRE(rep.err.size() == 26);
  CHECK(rep.err.back() < 5e-2);
  for (size_t k = 10; k + 1 < rep.err.size(); ++k)
    CHECK(rep.err[k + 1] <= rep.err[k] + 1e-10);
  CHECK_FALSE(rep.rate_fitted);  // rate fits are reserved for front-like data
}

TEST_CASE("front-like data converge at a fitted exponential rate") {
  const auto e = tanh_env();
  const auto alpha0 = front_c1().alpha.value_at(0.0);
  // 15 periods keeps the whole fit window inside the exponential regime;
  // past ~20 the error saturates at the discretization floor (~3e-4 at this
  // resolution) and a log-linear fit across the elbow is meaningless.
  const auto rep = dynamics::wave_attraction_error(
      e, 1.0, InitialData::front(alpha0, 0.0), front_c1(),
      {-80.0, 130.0, 2101}, cheap_cfg(), 15.0);

  CHECK(rep.err.back() < 2e-3);
  CHECK(rep.rate_fitted);
  CHECK(rep.sigma_hat > 0.05);
  CHECK(rep.log_rms < 0.1);
}

TEST_CASE("attraction-error guards") {
  const auto e = tanh_env();
  const auto init = InitialData::bump(1.0, 0.0, 1.0);
  const pde::Grid1D grid{-40.0, 40.0, 801};

  CHECK_THROWS_AS(dynamics::wave_attraction_error(e, 1.0, init, front_c1(),
                                                  grid, cheap_cfg(), 2.5),
                  PhaseMismatch);

  auto wrong_speed = front_c1();
  wrong_speed.c = 1.2;
  CHECK_THROWS_AS(dynamics::wave_attraction_error(e, 1.0, init, wrong_speed,
                                                  grid, cheap_cfg(), 2.0),
                  InvalidArgument);

  auto wrong_kind = front_c1();
  wrong_kind.kind = waves::WaveProfile::Kind::pulse;
  CHECK_THROWS_AS(dynamics::wave_attraction_error(e, 1.0, init, wrong_kind,
                                                  grid, cheap_cfg(), 2.0),
                  InvalidArgument);

  auto wrong_period = front_c1();
  wrong_period.period = 2.0;
  CHECK_THROWS_AS(dynamics::wave_attraction_error(e, 1.0, init, wrong_period,
                                                  grid, cheap_cfg(), 2.0),
                  InvalidArgument);

  // attraction needs |c| below the free speed
  auto fast = front_c1();
  fast.c = 2.5;
  CHECK_THROWS_AS(dynamics::wave_attraction_error(e, 2.5, init, fast, grid,
                                                  cheap_cfg(), 2.0),
                  InvalidArgument);
}

TEST_CASE("boundary contamination is flagged, not fatal") {
  const auto e = tanh_env();
  const auto res = dynamics::run_ivp(e, 0.0, InitialData::bump(1.0, 0.0, 1.0),
                                     {-10.0, 10.0, 201}, cheap_cfg(), 6);
  CHECK(res.trace.contaminated);
  CHECK(res.trace.note.find("margin") != std::string::npos);
  // the run itself carries on to the horizon
  CHECK(res.trace.size() == 7);
  CHECK(std::isfinite(res.trace.sup_u.back()));
}

TEST_SUITE_END();
