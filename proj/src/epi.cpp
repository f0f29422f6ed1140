#include "rdshift/epi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <memory>
#include <utility>

#include "rdshift/errors.hpp"
#include "rdshift/numerics.hpp"

namespace rdshift::epi {

namespace {

std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

/// a_bar inherits the orbit solver's ~1e-10 noise through N*; means this
/// close to zero are treated as "no endemic state" (at an exact zero the
/// infection orbit does not exist and the bisection would have no bracket).
constexpr double kAbarTol = 1e-9;

double max_over_period(const std::function<double(double)>& f, double T,
                       int n = 65) {
  double m = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) m = std::max(m, f(T * j / n));
  return m;
}

pode::PeriodicOrbit solve_n_star(const EpidemicParams& p, double ceiling) {
  auto hN = [&p](double t, double N) { return p.B(t, N) - p.mu(t, N); };
  pode::OrbitOptions opt;
  opt.mesh = 512;
  opt.hi = 2.0 * ceiling;
  return pode::solve_periodic_orbit(hN, p.period, opt);
}

}  // namespace

// ---------------------------------------------------------------------------
// EpidemicParams
// ---------------------------------------------------------------------------

double EpidemicParams::validate() const {
  if (!B || !mu || !omega_tilde || !gamma)
    throw InvalidArgument(
        "epidemic params: all four coefficient functions must be set");
  if (!(period > 0.0))
    throw InvalidArgument("epidemic params: period must be positive");
  if (!(l >= 0.0))
    throw InvalidArgument("epidemic params: transmission scale must be >= 0");
  for (int j = 0; j < 33; ++j) {
    const double t = period * j / 33.0;
    if (omega_tilde(t) < 0.0)
      throw InvalidArgument(strf(
          "epidemic params: omega_tilde must be nonnegative (t = %.4g)", t));
  }

  // positive mean growth of the total population at N = 0
  const double m0 = num::mean_over_period(
      [this](double t) { return B(t, 0.0) - mu(t, 0.0); }, period);
  if (!(m0 > 0.0))
    throw AssumptionViolation(strf(
        "epidemic params: mean of B - mu at N = 0 must be positive (got %.6g)",
        m0));

  // a ceiling M with B(t, M) - mu(t, M) <= 0 for all t
  double M = n_upper > 0.0 ? n_upper : 1.0;
  auto worst = [&](double N) {
    return max_over_period(
        [&](double t) { return B(t, N) - mu(t, N); }, period);
  };
  if (n_upper > 0.0) {
    if (worst(M) > 0.0)
      throw AssumptionViolation(strf(
          "epidemic params: B - mu stays positive at the declared ceiling "
          "N = %.6g",
          M));
  } else {
    int k = 0;
    for (; k < 60 && worst(M) > 0.0; ++k) M *= 2.0;
    if (k == 60)
      throw AssumptionViolation(
          "epidemic params: no ceiling M with B(t,M) <= mu(t,M) found by "
          "doubling");
  }

  // strict decrease of B - mu in N, sampled on [0, 2M]
  for (int jt = 0; jt < 9; ++jt) {
    const double t = period * jt / 9.0;
    double prev = B(t, 0.0) - mu(t, 0.0);
    for (int jn = 1; jn <= 8; ++jn) {
      const double N = 2.0 * M * jn / 8.0;
      const double cur = B(t, N) - mu(t, N);
      if (!(cur < prev))
        throw AssumptionViolation(strf(
            "epidemic params: B - mu is not strictly decreasing in N "
            "(t = %.4g, N = %.4g)",
            t, N));
      prev = cur;
    }
  }
  return M;
}

// ---------------------------------------------------------------------------
// derive_epidemic
// ---------------------------------------------------------------------------

EpidemicDerived derive_epidemic(const EpidemicParams& p) {
  const double M = p.validate();

  EpidemicDerived d;
  d.period = p.period;
  d.n_star = solve_n_star(p, M);
  d.c_n = 2.0 * std::sqrt(num::mean_over_period(
              [&p](double t) { return p.B(t, 0.0) - p.mu(t, 0.0); },
              p.period));

  auto n_star = std::make_shared<const pode::PeriodicOrbit>(d.n_star);
  auto mu = p.mu;
  auto wt = p.omega_tilde;
  auto gm = p.gamma;
  const double l = p.l;
  d.a = [n_star, mu, wt, gm, l](double t) {
    const double N = n_star->value_at(t);
    return l * wt(t) * N - mu(t, N) - gm(t);
  };
  d.a_bar = num::mean_over_period(d.a, p.period);

  if (d.a_bar > kAbarTol) {
    auto a = d.a;
    auto hI = [a, wt, l](double t, double I) { return a(t) - l * wt(t) * I; };
    const double w_min =
        -max_over_period([&](double t) { return -l * wt(t); }, p.period);
    if (!(w_min > 0.0))
      throw AssumptionViolation(
          "derive_epidemic: omega must stay positive for the endemic "
          "infection orbit");
    pode::OrbitOptions opt;
    opt.mesh = 512;
    opt.hi = 2.0 * std::max(1.0, max_over_period(a, p.period) / w_min);
    d.i_star = pode::solve_periodic_orbit(hI, p.period, opt);

    // endemic infections stay below the total population (the two orbits
    // may carry different mesh refinements, so compare by time)
    for (int j = 0; j <= 512; ++j) {
      const double t = p.period * j / 512.0;
      const double I = d.i_star->value_at(t), N = d.n_star.value_at(t);
      if (!(I < N + 1e-10))
        throw AssumptionViolation(strf(
            "derive_epidemic: I* >= N* at t = %.6g (%.6g vs %.6g)", t, I, N));
    }
  }

  if (d.a_bar > 0.25 * d.c_n * d.c_n) {
    d.has_wave_interval = true;
    d.c_lo = d.c_n;
    d.c_hi = 2.0 * std::sqrt(d.a_bar);
  }
  return d;
}

// ---------------------------------------------------------------------------
// transmission_thresholds
// ---------------------------------------------------------------------------

TransmissionThresholds transmission_thresholds(const EpidemicParams& p) {
  const double M = p.validate();
  const pode::PeriodicOrbit n_star = solve_n_star(p, M);

  TransmissionThresholds th;
  th.gain = num::mean_over_period(
      [&](double t) { return p.omega_tilde(t) * n_star.value_at(t); },
      p.period);
  th.loss = num::mean_over_period(
      [&](double t) { return p.mu(t, n_star.value_at(t)) + p.gamma(t); },
      p.period);
  const double quarter_cn2 = num::mean_over_period(
      [&](double t) { return p.B(t, 0.0) - p.mu(t, 0.0); }, p.period);

  if (!(th.gain > 1e-13 * std::max(1.0, std::abs(th.loss))))
    throw DegenerateTransmission(
        "transmission thresholds: the mean of omega_tilde N* vanishes, "
        "a_bar cannot cross zero");

  th.l_star = th.loss / th.gain;
  th.l_upper = (th.loss + quarter_cn2) / th.gain;
  return th;
}

// ---------------------------------------------------------------------------
// period_limits
// ---------------------------------------------------------------------------

PeriodLimitsReport period_limits(const EpidemicParams& p,
                                 const std::vector<double>& T_values) {
  if (std::abs(p.period - 1.0) > 1e-12)
    throw InvalidArgument(
        "period_limits: params must be normalized (period == 1, coefficients "
        "1-periodic in s)");
  const double M = p.validate();
  auto f = [&p](double s, double w) { return p.B(s, w) - p.mu(s, w); };

  const double lo = 1e-8, hi = 2.0 * M;
  auto bracket_root = [&](const std::function<double(double)>& F,
                          const char* what) {
    const double flo = F(lo), fhi = F(hi);
    if (!(flo > 0.0 && fhi < 0.0))
      throw RootBracketFailure(strf(
          "period_limits: %s has no sign change on [%.3g, %.3g] "
          "(F = %.3g, %.3g)",
          what, lo, hi, flo, fhi));
    return num::bisect(F, lo, hi, 1e-13, 1e-13).root;
  };

  PeriodLimitsReport rep;

  // T -> 0: the root of the s-averaged growth rate
  rep.v0 = bracket_root(
      [&](double w) {
        return num::mean_over_period([&](double s) { return f(s, w); }, 1.0);
      },
      "the s-averaged growth rate");

  // T -> infinity: the pointwise root at each mesh node
  const int mesh = 256;
  rep.v_inf.period = 1.0;
  rep.v_inf.tol = 1e-13;
  rep.v_inf.values.resize(mesh + 1);
  for (int j = 0; j <= mesh; ++j) {
    const double s = static_cast<double>(j) / mesh;
    rep.v_inf.values[static_cast<size_t>(j)] = bracket_root(
        [&](double w) { return f(s, w); },
        strf("the growth rate at s = %.4g", s).c_str());
  }

  auto a_bar_of = [&](const std::function<double(double)>& v) {
    return num::mean_over_period(
        [&](double s) {
          const double w = v(s);
          return p.l * p.omega_tilde(s) * w - p.mu(s, w) - p.gamma(s);
        },
        1.0);
  };
  rep.a_bar_0 = a_bar_of([&](double) { return rep.v0; });
  rep.a_bar_inf = a_bar_of([&](double s) { return rep.v_inf.value_at(s); });

  for (double T : T_values) {
    if (!(T > 0.0))
      throw InvalidArgument("period_limits: every T must be positive");
    auto h = [&, T](double s, double w) { return T * f(s, w); };
    pode::OrbitOptions opt;
    opt.mesh = 512;
    opt.hi = hi;
    rep.T_values.push_back(T);
    rep.v.push_back(pode::solve_periodic_orbit(h, 1.0, opt));
    const auto& orbit = rep.v.back();
    rep.a_bar.push_back(a_bar_of([&](double s) { return orbit.value_at(s); }));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// compute_n_wave
// ---------------------------------------------------------------------------

waves::WaveProfile compute_n_wave(const EpidemicParams& p,
                                  const EpidemicDerived& d, double c,
                                  const pde::Grid1D& xi_grid,
                                  const pde::StepperConfig& cfg,
                                  long settle_periods) {
  xi_grid.validate();
  if (!(c >= d.c_n - 1e-12))
    throw InvalidArgument(strf(
        "n-wave: needs c >= c_N = %.6g (got c = %.6g)", d.c_n, c));
  if (settle_periods < 1)
    throw InvalidArgument("n-wave: settle_periods must be at least 1");
  const double T = p.period;
  const double M = p.validate();

  // speed-selecting tail rate: the slow root of lambda^2 - c lambda + cn^2/4
  const double lam =
      0.5 * (c - std::sqrt(std::max(0.0, c * c - d.c_n * d.c_n)));

  // Homogeneous habitat for the total population; B - mu need not be affine
  // in N, so base/slope stay unset and the stepper takes the general path.
  env::PeriodicEnvironment eN;
  eN.period = T;
  eN.label = "n-equation";
  eN.m_cap = M;
  auto B = p.B;
  auto mu = p.mu;
  eN.g = [B, mu](double t, double, double u) { return B(t, u) - mu(t, u); };
  eN.limit_left = [B, mu](double t, double u) { return B(t, u) - mu(t, u); };
  eN.limit_right = eN.limit_left;

  // The homogeneous equation has free phase, so a lab-frame front relaxes
  // only algebraically. In the frame moving at c the boundary conditions pin
  // the phase and the period map contracts. Clamp the left node to the
  // stepper's own discrete periodic state (a flat auxiliary run), not to the
  // continuum orbit: the integrator's one-period bias would otherwise sit in
  // the boundary node and break the monotonicity tolerance.
  const double n0 = d.n_star.value_at(0.0);
  pde::BoundaryPolicy flat_bc{pde::BoundarySide::neumann_zero(),
                              pde::BoundarySide::neumann_zero()};
  pde::Grid1D mini{xi_grid.x_min - 7.0 * xi_grid.dx(), xi_grid.x_min, 8};
  pde::Stepper aux(eN, pde::Frame::moving(0.0), flat_bc, cfg,
                   pde::make_field(mini, 0.0, [n0](double) { return n0; }));
  const int spp = aux.steps_per_period();
  if (spp % 64 != 0)
    throw InvalidArgument(strf(
        "n-wave: steps per period must be divisible by 64 (got %d)", spp));
  double prev_a = n0;
  long ka = 0;
  for (; ka < 200; ++ka) {
    aux.advance_periods(1);
    const double cur = aux.field().values[0];
    if (std::abs(cur - prev_a) < 1e-13 * std::max(1.0, std::abs(cur))) break;
    prev_a = cur;
  }
  if (ka == 200)
    throw NonConvergence(
        "n-wave: far-left periodic state did not settle within 200 periods");
  pode::PeriodicOrbit clamp;
  clamp.period = T;
  clamp.tol = 1e-12;
  clamp.values.resize(static_cast<size_t>(spp) + 1);
  clamp.values[0] = aux.field().values[0];
  for (int s = 1; s <= spp; ++s) {
    aux.advance(1);
    clamp.values[static_cast<size_t>(s)] = aux.field().values[0];
  }

  // A pulled front is driven by its exponential tail; an absorbing right
  // wall starves it and it retreats at about c_N - c. Clamp the right node
  // to the tail ansatz n0 e^{-lam xi} w(t) instead (w is the periodic weight
  // of the zero-mean part of the growth rate), which feeds the front and
  // pins its phase.
  const double fbar = 0.25 * d.c_n * d.c_n;
  auto w = pode::periodic_weight(
      [&](double t) { return B(t, 0.0) - mu(t, 0.0) - fbar; }, T, 512);
  pode::PeriodicOrbit tail;
  tail.period = T;
  tail.tol = 1e-12;
  tail.values.resize(static_cast<size_t>(spp) + 1);
  const double tail_amp = n0 * std::exp(-lam * xi_grid.x_max);
  for (int s = 0; s <= spp; ++s)
    tail.values[static_cast<size_t>(s)] =
        tail_amp * w.value_at(T * s / spp);

  pde::Field u0 = pde::make_field(xi_grid, 0.0, [n0, lam](double x) {
    return n0 * std::min(1.0, std::exp(-lam * x));
  });
  pde::BoundaryPolicy bc{pde::BoundarySide::clamp(std::move(clamp)),
                         pde::BoundarySide::clamp(std::move(tail))};
  pde::Stepper st(eN, pde::Frame::moving(c), bc, cfg, std::move(u0));

  std::vector<double> prev = st.field().values;
  double residual = std::numeric_limits<double>::infinity();
  long k = 0;
  for (; k < settle_periods; ++k) {
    st.advance_periods(1);
    const auto& cur = st.field().values;
    residual = 0.0;
    for (size_t i = 0; i < cur.size(); ++i)
      residual = std::max(residual, std::abs(cur[i] - prev[i]));
    prev = cur;
    if (residual < 1e-10) {
      ++k;
      break;
    }
  }
  if (!(residual < 1e-6))
    throw NonConvergence(strf(
        "n-wave: profile still changing by %.3e per period after %ld periods",
        residual, k));

  // Phase-locked capture of 65 slices across one more period.
  waves::WaveProfile W;
  W.kind = waves::WaveProfile::Kind::kpp;
  W.grid = xi_grid;
  W.c = c;
  W.period = T;
  W.alpha = d.n_star;
  W.residual = residual;
  W.periods = k;
  W.window_left = xi_grid.x_min;
  W.t_mesh.resize(65);
  W.U.resize(65);
  for (int j = 0; j <= 64; ++j) {
    if (j > 0) st.advance(spp / 64);
    W.t_mesh[static_cast<size_t>(j)] = T * j / 64.0;
    W.U[static_cast<size_t>(j)] = st.field().values;
  }

  // The front must be non-increasing in xi; measure the raw violation, then
  // project the sub-tolerance interpolation wiggle away.
  double viol = 0.0;
  for (const auto& row : W.U)
    for (size_t i = 0; i + 1 < row.size(); ++i)
      viol = std::max(viol, row[i + 1] - row[i]);
  W.mono_violation = std::max(viol, 0.0);
  if (W.mono_violation > 1e-8)
    throw MonotonicityViolation(strf(
        "n-wave: profile increases in xi by %.3e (tolerance 1e-8)", viol));
  for (auto& row : W.U)
    for (size_t i = 1; i < row.size(); ++i)
      row[i] = std::min(row[i], row[i - 1]);

  double ld = 0.0, rd = 0.0, sup = 0.0;
  for (size_t j = 0; j < W.U.size(); ++j) {
    ld = std::max(ld, std::abs(W.U[j].front() -
                               d.n_star.value_at(W.t_mesh[j])));
    rd = std::max(rd, std::abs(W.U[j].back()));
    sup = std::max(sup, *std::max_element(W.U[j].begin(), W.U[j].end()));
  }
  W.left_dev = ld;
  W.right_dev = rd;
  W.interior_sup = sup;
  return W;
}

// ---------------------------------------------------------------------------
// epidemic_environment
// ---------------------------------------------------------------------------

env::PeriodicEnvironment epidemic_environment(const EpidemicParams& p,
                                              const EpidemicDerived& d,
                                              const waves::WaveProfile& n_wave) {
  if (n_wave.kind != waves::WaveProfile::Kind::kpp)
    throw InvalidArgument(
        "epidemic environment: the N profile must be front-like (kpp kind)");
  if (std::abs(n_wave.period - p.period) > 1e-12)
    throw InvalidArgument(
        "epidemic environment: N profile and parameter periods differ");

  double viol = 0.0;
  for (const auto& row : n_wave.U)
    for (size_t i = 0; i + 1 < row.size(); ++i)
      viol = std::max(viol, row[i + 1] - row[i]);
  if (viol > 1e-8)
    throw MonotonicityViolation(strf(
        "epidemic environment: N profile increases in xi by %.3e", viol));

  auto W = std::make_shared<const waves::WaveProfile>(n_wave);
  auto n_star = std::make_shared<const pode::PeriodicOrbit>(d.n_star);
  auto mu = p.mu;
  auto wt = p.omega_tilde;
  auto gm = p.gamma;
  const double l = p.l;
  auto omega = [wt, l](double t) { return l * wt(t); };

  env::PeriodicEnvironment e;
  e.period = p.period;
  e.label = "sis-i-equation";
  auto base = [W, mu, omega, gm](double t, double xi) {
    const double N = W->value_at(t, xi);
    return omega(t) * N - mu(t, N) - gm(t);
  };
  e.base = base;
  e.slope = omega;
  e.g = [base, omega](double t, double xi, double u) {
    return base(t, xi) - omega(t) * u;
  };
  e.limit_left = [n_star, mu, omega, gm](double t, double u) {
    const double N = n_star->value_at(t);
    return omega(t) * N - mu(t, N) - gm(t) - omega(t) * u;
  };
  e.limit_right = [mu, omega, gm](double t, double u) {
    return -mu(t, 0.0) - gm(t) - omega(t) * u;
  };

  // Beyond its grid the profile extends by its exact limits, so the clamp
  // is exact from the grid edge on.
  const double cutoff =
      std::min(-n_wave.grid.x_min, n_wave.grid.x_max) - 1.0;
  if (!(cutoff > 0.0))
    throw InvalidArgument(
        "epidemic environment: the N profile grid must straddle xi = 0");
  e.limit_cutoff = cutoff;
  e.limit_tol = std::max(n_wave.left_dev, n_wave.right_dev);
  e.decay = env::DecayMeta{1.0, 2};  // exponential approach beats any power

  double a_max = 0.0, w_min = omega(0.0);
  for (int j = 0; j < 64; ++j) {
    const double t = p.period * j / 64.0;
    a_max = std::max(a_max, e.limit_left(t, 0.0));
    w_min = std::min(w_min, omega(t));
  }
  if (!(w_min > 0.0))
    throw InvalidArgument(
        "epidemic environment: omega must stay positive");
  e.m_cap = std::max(a_max / w_min, n_star->max_value());
  return e;
}

}  // namespace rdshift::epi
