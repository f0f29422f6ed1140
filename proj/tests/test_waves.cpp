#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rdshift/env.hpp"
#include "rdshift/errors.hpp"
#include "rdshift/numerics.hpp"
#include "rdshift/pde.hpp"
#include "rdshift/pode.hpp"
#include "rdshift/waves.hpp"

using namespace rdshift;

TEST_SUITE_BEGIN("waves");

namespace {

env::PeriodicEnvironment tanh_env(double seasonal = 0.5) {
  env::EnvironmentParams p;
  p.kind = env::Kind::tanh_fisher;
  p.seasonal_amp = seasonal;
  return env::build_environment(p);
}

env::PeriodicEnvironment tanh_env_decay(int m) {
  env::EnvironmentParams p;
  p.kind = env::Kind::tanh_fisher;
  p.seasonal_amp = 0.5;
  p.decay = env::DecayMeta{1.0, m};
  return env::build_environment(p);
}

// Spatially uniform growth rate on the verification window: g == rho(t) for
// x <= 25 (u-independent), ramped down beyond so the mean at +inf is
// negative as the speed data requires. The exponential envelope with the
// periodic weight is then an exact solution on any grid inside [-40, 25].
env::PeriodicEnvironment uniform_env() {
  env::PeriodicEnvironment e;
  e.period = 1.0;
  e.label = "uniform";
  e.m_cap = 2.0;
  auto rho = [](double t) { return 1.0 + 0.5 * std::sin(2.0 * num::pi * t); };
  auto ramp = [](double x) {
    if (x <= 25.0) return 0.0;
    if (x >= 35.0) return 2.0;
    return 2.0 * num::smoothstep((x - 25.0) / 10.0);
  };
  e.g = [rho, ramp](double t, double x, double) { return rho(t) - ramp(x); };
  e.limit_left = [rho](double t, double) { return rho(t); };
  e.limit_right = [rho](double t, double) { return rho(t) - 2.0; };
  e.base = [rho, ramp](double t, double x) { return rho(t) - ramp(x); };
  e.slope = [](double) { return 0.0; };
  return e;
}

env::PeriodicEnvironment shifted_env(env::PeriodicEnvironment e, double y) {
  auto base0 = e.base;
  auto g0 = e.g;
  e.base = [base0, y](double t, double xi) { return base0(t, xi - y); };
  e.g = [g0, y](double t, double xi, double u) { return g0(t, xi - y, u); };
  e.limit_cutoff += std::abs(y);
  return e;
}

pde::Grid1D cheap_grid() { return pde::Grid1D{-100.0, 100.0, 2001}; }

pde::StepperConfig cheap_cfg() {
  pde::StepperConfig cfg;
  cfg.steps_per_period = 256;
  return cfg;
}

// Several cases inspect the same converged front; compute it once.
const waves::WaveProfile& front_c1() {
  static const waves::WaveProfile w = [] {
    auto e = tanh_env();
    return waves::compute_kpp_wave(e, 1.0, cheap_grid(), cheap_cfg(), 1e-8);
  }();
  return w;
}

double quad_root_residual(double root, double c, double gbar) {
  return root * root + c * root + gbar;
}

}  // namespace

TEST_CASE("speed data matches the closed forms") {
  auto e = tanh_env();
  auto sd = waves::compute_speed_data(e);

  CHECK(sd.g_minus_mean == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sd.g_plus_mean == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(sd.c_star == doctest::Approx(2.0).epsilon(1e-10));

  // lambda_1c is the smaller-|.| root of l^2 + c l + gbar_- = 0.
  CHECK(sd.lambda_1c(2.5) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(sd.lambda_1c(-2.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sd.lambda_1c(2.0) == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(std::abs(quad_root_residual(sd.lambda_1c(3.2), 3.2, sd.g_minus_mean)) <
        1e-12);

  // mu_c solves m^2 + c m + gbar_+ = 0 with the negative sign; it decays
  // strictly faster than the front rate whenever both are defined.
  for (double c : {2.0, 2.5, 3.0, -2.5}) {
    const double mu = sd.mu_c(c);
    CHECK(mu < 0.0);
    CHECK(std::abs(quad_root_residual(mu, c, sd.g_plus_mean)) < 1e-12);
    if (c >= sd.c_star) CHECK(mu < sd.lambda_1c(c));
  }

  // mu_1 is the smallest positive root for c <= -c_star.
  CHECK(sd.mu_1(-2.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sd.mu_1(-2.0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK_THROWS_AS(std::ignore = sd.lambda_1c(1.0), InvalidArgument);
  CHECK_THROWS_AS(std::ignore = sd.mu_1(-1.0), InvalidArgument);
  CHECK_THROWS_AS(std::ignore = sd.mu_1(2.5), InvalidArgument);
}

TEST_CASE("speed data rejects wrong-signed limit means") {
  // The factory already refuses a habitat that is unfavourable behind the
  // interface, so the speed data's own guard needs a hand-built stand-in.
  env::EnvironmentParams p;
  p.kind = env::Kind::tanh_fisher;
  p.r_offset = -0.5;
  CHECK_THROWS_AS(std::ignore = env::build_environment(p), InvalidArgument);

  auto bad_left = tanh_env();
  bad_left.limit_left = [](double, double) { return -0.5; };
  CHECK_THROWS_AS(std::ignore = waves::compute_speed_data(bad_left),
                  AssumptionViolation);

  env::EnvironmentParams q;
  q.kind = env::Kind::tanh_fisher;
  q.s_offset = 0.5;  // favourable ahead of the interface
  CHECK_THROWS_AS(std::ignore = waves::compute_speed_data(
                      env::build_environment(q)),
                  AssumptionViolation);
}

TEST_CASE("uniform growth: exponential envelope is an exact solution") {
  auto e = uniform_env();
  auto rec = waves::build_envelope(waves::EnvelopeKind::super_exponential, e,
                                   2.5);
  CHECK(rec.lambda == doctest::Approx(-0.5).epsilon(1e-12));

  pde::Grid1D grid{-20.0, 20.0, 401};
  auto ts = waves::default_t_samples(rec);

  // Analytic derivatives: the residual vanishes identically, so only
  // floating-point roundoff remains.
  auto rep = waves::check_envelope(rec, e, 2.5, grid, ts, 1e-6);
  CHECK(rep.pass());
  CHECK(!rep.used_fd);
  CHECK(std::abs(rep.max_normalized) < 1e-12);

  // Same recipe through the finite-difference route: an independent check
  // that the evaluator and the analytic derivatives describe one function.
  auto fd = rec;
  fd.derivs = {};
  auto rep_fd = waves::check_envelope(fd, e, 2.5, grid, ts, 1e-5);
  CHECK(rep_fd.used_fd);
  CHECK(rep_fd.pass());
  CHECK(std::abs(rep_fd.max_normalized) < 1e-5);
}

TEST_CASE("super-exponential envelope verifies in both speed regimes") {
  auto e = tanh_env();
  pde::Grid1D grid{-60.0, 60.0, 1201};

  for (double c : {2.5, -3.0, 2.0}) {
    CAPTURE(c);
    auto rec = waves::build_envelope(waves::EnvelopeKind::super_exponential,
                                     e, c);
    CHECK(rec.is_super);
    CHECK(rec.kinks.empty());
    auto rep = waves::check_envelope(rec, e, c, grid,
                                     waves::default_t_samples(rec), 1e-6);
    CHECK(rep.pass());
    CHECK(rep.checked_super);
    CHECK(!rep.checked_sub);
  }

  CHECK_THROWS_AS(std::ignore = waves::build_envelope(
                      waves::EnvelopeKind::super_exponential, e, 1.0),
                  ParamsInfeasible);
}

TEST_CASE("sine-bump sub-solution: support, kinks, growth factor") {
  auto e = tanh_env();
  const double c = 0.7;
  auto rec = waves::build_envelope(waves::EnvelopeKind::sub_sine_bump, e, c);
  CHECK(!rec.is_super);
  REQUIRE(rec.kinks.size() == 2);
  CHECK(rec.kinks[0] == doctest::Approx(rec.x_eps - rec.L));
  CHECK(rec.kinks[1] == doctest::Approx(rec.x_eps));

  // Zero outside the support, positive strictly inside.
  CHECK(rec.evaluator(0.3, rec.kinks[0] - 1e-9) == 0.0);
  CHECK(rec.evaluator(0.3, rec.kinks[1] + 1e-9) == 0.0);
  CHECK(rec.evaluator(0.3, 0.5 * (rec.kinks[0] + rec.kinks[1])) > 0.0);

  // The bump grows by exactly exp(lambda T) per period.
  const double mid = 0.5 * (rec.kinks[0] + rec.kinks[1]);
  const double ratio =
      rec.evaluator(0.3 + rec.period, mid) / rec.evaluator(0.3, mid);
  CHECK(ratio == doctest::Approx(std::exp(rec.lambda * rec.period))
                     .epsilon(1e-10));

  pde::Grid1D grid{-60.0, 60.0, 1201};
  auto rep = waves::check_envelope(rec, e, c, grid,
                                   waves::default_t_samples(rec), 1e-6);
  CHECK(rep.pass());
  CHECK(rep.checked_sub);
  REQUIRE(rep.kinks.size() == 2);
  for (const auto& k : rep.kinks) {
    CHECK(k.ok);
    CHECK(k.jump > 0.0);  // sub-solutions need convex corners
  }

  // An oversized amplitude breaks the differential inequality and the
  // residual scan must say so, with the witness inside the support.
  waves::EnvelopeParams big;
  big.delta = 100.0 * rec.delta;
  auto bad = waves::build_envelope(waves::EnvelopeKind::sub_sine_bump, e, c,
                                   big);
  auto rep_bad = waves::check_envelope(bad, e, c, grid,
                                       waves::default_t_samples(bad), 1e-6);
  CHECK(!rep_bad.pass());
  CHECK(!rep_bad.sub_ok);
  CHECK(rep_bad.min_at_x > rec.kinks[0]);
  CHECK(rep_bad.min_at_x < rec.kinks[1]);

  // Wrong regime and infeasible margins.
  CHECK_THROWS_AS(std::ignore = waves::build_envelope(
                      waves::EnvelopeKind::sub_sine_bump, e, 2.0),
                  ParamsInfeasible);
  waves::EnvelopeParams tight;
  tight.epsilon = 2.0;  // >= q = (c_star^2 - c^2)/4
  CHECK_THROWS_AS(std::ignore = waves::build_envelope(
                      waves::EnvelopeKind::sub_sine_bump, e, c, tight),
                  ParamsInfeasible);
  waves::EnvelopeParams narrow;
  narrow.L = 1.0;  // below the pi/sqrt(K) cutoff for this c
  CHECK_THROWS_AS(std::ignore = waves::build_envelope(
                      waves::EnvelopeKind::sub_sine_bump, e, c, narrow),
                  ParamsInfeasible);
}

TEST_CASE("two-exponential sub-solution at c <= -c_star") {
  auto e = tanh_env();
  const double c = -2.5;
  auto rec = waves::build_envelope(waves::EnvelopeKind::sub_two_exponential,
                                   e, c);
  CHECK(!rec.is_super);
  CHECK(rec.mu > 0.0);
  CHECK(rec.eta > 0.0);
  // The two rates straddle the vertex of the dispersion parabola.
  CHECK(rec.mu + rec.eta == doctest::Approx(-0.5 * c).epsilon(1e-12));

  REQUIRE(rec.kinks.size() == 1);
  const double x0 = -std::log(rec.M) / rec.eta;
  CHECK(rec.kinks[0] == doctest::Approx(x0));
  CHECK(rec.evaluator(0.2, x0 + 1e-9) == 0.0);
  CHECK(rec.evaluator(0.2, x0 - 0.5) > 0.0);

  pde::Grid1D grid{-60.0, 60.0, 1201};
  auto rep = waves::check_envelope(rec, e, c, grid,
                                   waves::default_t_samples(rec), 1e-6);
  CHECK(rep.pass());
  REQUIRE(rep.kinks.size() == 1);
  CHECK(rep.kinks[0].ok);
  CHECK(rep.kinks[0].jump > 0.0);

  CHECK_THROWS_AS(std::ignore = waves::build_envelope(
                      waves::EnvelopeKind::sub_two_exponential, e, -1.0),
                  ParamsInfeasible);
}

TEST_CASE("pulse envelopes at and below -c_star") {
  auto e1 = tanh_env_decay(1);
  auto e2 = tanh_env_decay(2);
  pde::Grid1D grid{-60.0, 60.0, 1201};

  // Upper envelope: a single decaying exponential in the tail rate mu_1.
  auto sup = waves::build_envelope(waves::EnvelopeKind::pulse_super, e1, -2.5);
  CHECK(sup.is_super);
  CHECK(sup.mu1 == doctest::Approx(0.5).epsilon(1e-12));
  auto rep_sup = waves::check_envelope(sup, e1, -2.5, grid,
                                       waves::default_t_samples(sup), 1e-6);
  CHECK(rep_sup.pass());

  // Lower envelope, strictly supercritical shift: k = 0 branch.
  auto sub = waves::build_envelope(waves::EnvelopeKind::pulse_sub_polynomial,
                                   e1, -2.5);
  CHECK(!sub.is_super);
  CHECK(sub.k == doctest::Approx(0.0));
  CHECK(sub.r > 0.0);
  CHECK(sub.r <= 0.5);
  REQUIRE(sub.kinks.size() == 1);
  CHECK(sub.evaluator(0.1, sub.kinks[0] + 1e-9) == 0.0);
  CHECK(sub.evaluator(0.1, sub.kinks[0] - 1.0) > 0.0);
  auto rep_sub = waves::check_envelope(sub, e1, -2.5, grid,
                                       waves::default_t_samples(sub), 1e-6);
  CHECK(rep_sub.pass());
  REQUIRE(rep_sub.kinks.size() == 1);
  CHECK(rep_sub.kinks[0].ok);

  // Critical shift c = -c_star: k = 1 branch, needs second-order tail decay.
  auto crit = waves::build_envelope(waves::EnvelopeKind::pulse_sub_polynomial,
                                    e2, -2.0);
  CHECK(crit.k == doctest::Approx(1.0));
  auto rep_crit = waves::check_envelope(crit, e2, -2.0, grid,
                                        waves::default_t_samples(crit), 1e-6);
  CHECK(rep_crit.pass());

  // Metadata guards: the polynomial tail needs decay information, and the
  // critical case needs m >= 2.
  auto bare = tanh_env();
  bare.decay.reset();
  CHECK_THROWS_AS(std::ignore = waves::build_envelope(
                      waves::EnvelopeKind::pulse_sub_polynomial, bare, -2.5),
                  ParamsInfeasible);
  CHECK_THROWS_AS(std::ignore = waves::build_envelope(
                      waves::EnvelopeKind::pulse_sub_polynomial, e1, -2.0),
                  ParamsInfeasible);

  // Wrong regime for either pulse envelope.
  CHECK_THROWS_AS(std::ignore = waves::build_envelope(
                      waves::EnvelopeKind::pulse_super, e1, -1.9),
                  ParamsInfeasible);
}

TEST_CASE("fd fallback agrees with analytic derivatives") {
  auto e = tanh_env();
  pde::Grid1D grid{-40.0, 40.0, 801};
  auto rec = waves::build_envelope(waves::EnvelopeKind::super_exponential, e,
                                   2.5);
  auto ts = waves::default_t_samples(rec);
  auto rep_an = waves::check_envelope(rec, e, 2.5, grid, ts, 1e-6);
  auto fd = rec;
  fd.derivs = {};
  auto rep_fd = waves::check_envelope(fd, e, 2.5, grid, ts, 1e-5);
  CHECK(!rep_an.used_fd);
  CHECK(rep_fd.used_fd);
  CHECK(rep_an.pass());
  CHECK(rep_fd.pass());
  // Both routes normalize pointwise, so their extrema must agree to the
  // difference-stencil error.
  CHECK(std::abs(rep_an.max_normalized - rep_fd.max_normalized) < 2e-5);
}

TEST_CASE("front iteration: converged profile invariants at c = 1") {
  auto e = tanh_env();
  waves::IterationStats stats;
  auto W = waves::compute_kpp_wave(e, 1.0, cheap_grid(), cheap_cfg(), 1e-8,
                                   {}, &stats);

  CHECK(stats.converged);
  CHECK(!stats.probe);
  CHECK(stats.periods == W.periods);
  CHECK(stats.sup_per_period.size() == static_cast<size_t>(W.periods));
  CHECK(stats.change_per_period.size() == static_cast<size_t>(W.periods));
  CHECK(W.kind == waves::WaveProfile::Kind::kpp);
  CHECK(W.residual <= 1e-8);

  // Boundary fidelity: left end rides the carrying orbit, right end is
  // pinned to zero.
  CHECK(W.left_dev < 1e-2);
  CHECK(W.right_dev <= 1e-12);

  // Monotone in x on every slice, and squeezed between 0 and alpha(t).
  CHECK(W.mono_violation <= 1e-9);
  REQUIRE(W.U.size() == 65);
  for (size_t j = 0; j < W.U.size(); ++j) {
    const double cap = W.alpha.value_at(W.t_mesh[j]) + 1e-5;
    for (double v : W.U[j]) {
      CHECK(v >= 0.0);
      CHECK(v <= cap);
    }
  }
  CHECK(W.interior_sup > 0.1);

  // Extensions and node exactness of the profile accessors.
  CHECK(W.value_at(0.25, -1e4) ==
        doctest::Approx(W.alpha.value_at(0.25)).epsilon(1e-12));
  CHECK(W.value_at(0.30, 1e4) == 0.0);
  CHECK(W.value_at(0.0, W.grid.x(700)) == doctest::Approx(W.U[0][700]));
  CHECK(W.sup() > 0.5);
}

TEST_CASE("front iteration: the period cap raises and keeps statistics") {
  auto e = tanh_env();
  waves::KppOptions opt;
  opt.max_periods = 3;
  waves::IterationStats stats;
  CHECK_THROWS_AS(std::ignore = waves::compute_kpp_wave(
                      e, 1.0, cheap_grid(), cheap_cfg(), 1e-12, opt, &stats),
                  NonConvergence);
  CHECK(!stats.converged);
  CHECK(stats.periods == 3);
  CHECK(stats.change_per_period.size() == 3);
}

TEST_CASE("probe mode flags nonexistence beyond c_star") {
  auto e = tanh_env();
  waves::KppOptions opt;
  opt.max_periods = 400;
  waves::IterationStats stats;
  CHECK_THROWS_AS(std::ignore = waves::compute_kpp_wave(e, 2.5, cheap_grid(),
                                                        cheap_cfg(), 1e-6,
                                                        opt, &stats),
                  DegenerateWave);
  CHECK(stats.probe);
  CHECK(!stats.converged);
  REQUIRE(!stats.sup_per_period.empty());
  CHECK(stats.sup_per_period.back() <= 1e-5);
  CHECK(stats.sup_per_period.back() < stats.sup_per_period.front());
}

TEST_CASE("probe iterates from a uniform super state decrease monotonically") {
  auto e = tanh_env();
  waves::KppOptions opt;
  opt.max_periods = 40;
  waves::IterationStats stats;
  try {
    std::ignore = waves::compute_kpp_wave(e, 2.0, cheap_grid(), cheap_cfg(),
                                          1e-8, opt, &stats);
  } catch (const NonConvergence&) {
    // expected: at the critical speed the decay is too slow for 40 periods
  }
  CHECK(stats.probe);
  REQUIRE(stats.sup_per_period.size() >= 20);
  for (size_t k = 1; k < stats.sup_per_period.size(); ++k)
    CHECK(stats.sup_per_period[k] <= stats.sup_per_period[k - 1] + 1e-13);
}

TEST_CASE("autonomous interface: the front is steady and solves the ode") {
  auto e = tanh_env(0.0);
  // Strang stepping: the split fixed point then matches the semi-discrete
  // steady state to O(dt^2), which the residual bounds below rely on.
  auto cfg = cheap_cfg();
  cfg.scheme = pde::Scheme::strang;
  waves::IterationStats stats;
  auto W = waves::compute_kpp_wave(e, 0.0, cheap_grid(), cfg, 1e-9,
                                   {}, &stats);
  CHECK(stats.converged);

  // No seasonal forcing: all 65 slices are one profile.
  double slice_dev = 0.0;
  for (size_t j = 1; j < W.U.size(); ++j)
    for (size_t i = 0; i < W.U[j].size(); ++i)
      slice_dev = std::max(slice_dev, std::abs(W.U[j][i] - W.U[0][i]));
  CHECK(slice_dev < 1e-6);

  // The steady profile solves u'' + u g(x, u) = 0. Check it twice: against
  // the scheme's own 3-point Laplacian (tight) and against a 4th-order
  // stencil (looser, limited by the O(dx^2) gap to the continuum solution).
  const auto& u = W.U[0];
  const double dx = W.grid.dx();
  double r2 = 0.0, r4 = 0.0;
  for (int i = 200; i < W.grid.n - 200; ++i) {
    const auto idx = [&](int k) { return u[static_cast<size_t>(i + k)]; };
    const double lap2 = (idx(1) - 2.0 * idx(0) + idx(-1)) / (dx * dx);
    const double lap4 = (-idx(2) + 16.0 * idx(1) - 30.0 * idx(0) +
                         16.0 * idx(-1) - idx(-2)) /
                        (12.0 * dx * dx);
    const double react = idx(0) * e.eval(0.0, W.grid.x(i), idx(0));
    r2 = std::max(r2, std::abs(lap2 + react));
    r4 = std::max(r4, std::abs(lap4 + react));
  }
  CHECK(r2 < 1e-4);
  CHECK(r4 < 5e-3);
  CHECK(W.mono_violation <= 1e-9);
}

TEST_CASE("translation covariance under an environment shift") {
  auto e = tanh_env();
  const double y = 1.0;  // ten grid cells, so the lattices line up exactly
  auto ey = shifted_env(e, y);
  const auto& W = front_c1();
  auto Wy = waves::compute_kpp_wave(ey, 1.0, cheap_grid(), cheap_cfg(), 1e-8);

  double dev = 0.0;
  for (int j : {0, 17, 41, 64})
    for (double x = -50.0; x <= 50.0; x += 0.5)
      dev = std::max(dev, std::abs(Wy.slice_value(j, x + y) -
                                   W.slice_value(j, x)));
  CHECK(dev < 1e-5);
}

TEST_CASE("stability pair squeezes the computed front") {
  auto e = tanh_env();
  const auto& W = front_c1();

  waves::EnvelopeParams params;
  params.wave = &W;
  auto rec = waves::build_envelope(waves::EnvelopeKind::stability_pair, e,
                                   1.0, params);

  // xi0 solves mean_t g(t, xi, 0) = gbar_+/2; for this habitat the mean
  // profile is -tanh(xi), so xi0 = atanh(1/2) and the decay rate bound is
  // sigma0 = tanh(atanh(1/2) + 1)/4.
  CHECK(rec.xi0 == doctest::Approx(std::atanh(0.5)).epsilon(1e-5));
  CHECK(rec.sigma > 0.0);
  CHECK(rec.sigma <= std::min(1.0, 0.25 * std::tanh(std::atanh(0.5) + 1.0)) +
                         1e-9);
  CHECK(rec.rho > 0.0);
  CHECK(rec.delta > 0.0);

  // w- <= U <= w+ pointwise at several phases.
  for (double t : {0.0, 0.37, 0.81}) {
    for (double x = -40.0; x <= 40.0; x += 0.25) {
      const double u = W.value_at(t, x);
      CHECK(rec.evaluator(t, x) >= u - 1e-12);
      CHECK(rec.evaluator_minus(t, x) <= u + 1e-12);
    }
  }

  // Both halves of the pair must satisfy their differential inequalities.
  pde::Grid1D grid{-30.0, 30.0, 601};
  auto rep = waves::check_envelope(rec, e, 1.0, grid,
                                   waves::default_t_samples(rec), 1e-6);
  CHECK(rep.checked_super);
  CHECK(rep.checked_sub);
  CHECK(rep.pass());

  // Guards: the pair is built around a computed profile of matching speed.
  CHECK_THROWS_AS(std::ignore = waves::build_envelope(
                      waves::EnvelopeKind::stability_pair, e, 1.0),
                  ParamsInfeasible);
  CHECK_THROWS_AS(std::ignore = waves::build_envelope(
                      waves::EnvelopeKind::stability_pair, e, 1.5, params),
                  InvalidArgument);
}

TEST_CASE("pulse iteration stays inside its envelopes") {
  auto e = tanh_env_decay(1);
  waves::IterationStats stats;
  auto W = waves::compute_pulse_wave(e, -2.5, cheap_grid(), cheap_cfg(), 1e-8,
                                     {}, &stats);

  CHECK(stats.converged);
  CHECK(W.kind == waves::WaveProfile::Kind::pulse);
  CHECK(stats.max_sandwich_violation <= 1e-8);
  CHECK(W.residual <= 1e-8);

  // A localized hump: order-one interior mass, tails thin at both ends,
  // zero extensions off the grid.
  CHECK(W.sup() > 0.05);
  CHECK(W.sup() < 1.0);
  CHECK(W.slice_value(0, -90.0) < 1e-3);
  CHECK(W.slice_value(0, 90.0) < 1e-3);
  CHECK(W.value_at(0.1, -1e5) == 0.0);
  CHECK(W.value_at(0.1, 1e5) == 0.0);
  CHECK(W.left_dev < 1e-8);
  CHECK(W.right_dev <= 1e-12);

  // Nonnegative everywhere.
  for (const auto& row : W.U)
    for (double v : row) CHECK(v >= 0.0);
}

TEST_CASE("pulse iteration guards") {
  auto e = tanh_env_decay(1);

  // Wrong speed regime.
  CHECK_THROWS_AS(std::ignore = waves::compute_pulse_wave(
                      e, -1.9, cheap_grid(), cheap_cfg(), 1e-8),
                  ParamsInfeasible);

  // Shrinking the upper envelope below the lower one breaks the ordering
  // the sandwich needs; the solver must refuse up front and say which knob
  // to turn.
  waves::PulseOptions opt;
  opt.delta_super = 1e-6;
  try {
    std::ignore = waves::compute_pulse_wave(e, -2.5, cheap_grid(),
                                            cheap_cfg(), 1e-8, opt);
    CHECK(false);  // must not get here
  } catch (const ParamsInfeasible& ex) {
    CHECK(std::string(ex.what()).find("amplitude") != std::string::npos);
  }
}

TEST_CASE("period map limit is independent of the starting state") {
  auto e = tanh_env();
  auto rep = waves::verify_uniqueness(e, 0.0, cheap_grid(), cheap_cfg(), 1e-8);
  CHECK(!rep.any_degenerate);
  CHECK(rep.max_distance() < 1e-3);
  for (double s : rep.sup) CHECK(s > 0.5);
  for (long p : rep.periods) CHECK(p > 0);
}

TEST_CASE("steps per period must align with the slice capture") {
  auto e = tanh_env();
  pde::StepperConfig cfg;
  cfg.steps_per_period = 100;  // not divisible by 64
  CHECK_THROWS_AS(std::ignore = waves::compute_kpp_wave(
                      e, 1.0, cheap_grid(), cfg, 1e-8),
                  InvalidArgument);
}

TEST_SUITE_END();
