#include "rdshift/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <utility>

#include "rdshift/errors.hpp"
#include "rdshift/numerics.hpp"
#include "rdshift/pode.hpp"

namespace rdshift::dynamics {

namespace {

std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

pode::PeriodicOrbit solve_alpha(const env::PeriodicEnvironment& e) {
  pode::OrbitOptions opt;
  opt.mesh = 512;
  auto h = [&e](double t, double u) { return e.limit_left(t, u); };
  return pode::solve_periodic_orbit(h, e.period, opt);
}

double trapezoid_mass(const pde::Field& f) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < f.values.size(); ++i)
    s += 0.5 * (f.values[i] + f.values[i + 1]);
  return s * f.grid.dx();
}

/// Rightmost level crossing, linearly interpolated between nodes; -inf when
/// the field stays below the level everywhere.
double crossing_right(const pde::Grid1D& grid, const std::vector<double>& v,
                      double level) {
  for (int i = grid.n - 1; i >= 0; --i) {
    if (v[static_cast<size_t>(i)] >= level) {
      if (i == grid.n - 1) return grid.x_max;
      const double a = v[static_cast<size_t>(i)];
      const double b = v[static_cast<size_t>(i) + 1];
      return grid.x(i) + grid.dx() * (a - level) / (a - b);
    }
  }
  return -kInf;
}

double crossing_left(const pde::Grid1D& grid, const std::vector<double>& v,
                     double level) {
  for (int i = 0; i < grid.n; ++i) {
    if (v[static_cast<size_t>(i)] >= level) {
      if (i == 0) return grid.x_min;
      const double a = v[static_cast<size_t>(i)];
      const double b = v[static_cast<size_t>(i) - 1];
      return grid.x(i) - grid.dx() * (a - level) / (a - b);
    }
  }
  return kInf;
}

/// Slope and rms of the plain linear fit y ~ a + b t.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit fit_line(const std::vector<double>& t, const std::vector<double>& y) {
  const size_t n = t.size();
  double tm = 0.0, ym = 0.0;
  for (size_t i = 0; i < n; ++i) {
    tm += t[i];
    ym += y[i];
  }
  tm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double stt = 0.0, sty = 0.0;
  for (size_t i = 0; i < n; ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
  }
  LineFit fit;
  fit.slope = sty / stt;
  fit.intercept = ym - fit.slope * tm;
  double ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * t[i];
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

}  // namespace

// ---------------------------------------------------------------------------
// InitialData
// ---------------------------------------------------------------------------

InitialData InitialData::bump(double height, double center, double half_width) {
  InitialData d;
  d.kind = Kind::compact_bump;
  d.height = height;
  d.center = center;
  d.width = half_width;
  return d;
}

InitialData InitialData::exp_tail(double rate, double height, double peak) {
  InitialData d;
  d.kind = Kind::exp_tail;
  d.rate = rate;
  d.height = height;
  d.center = peak;
  return d;
}

InitialData InitialData::front(double level, double interface_at) {
  InitialData d;
  d.kind = Kind::front_like;
  d.height = level;
  d.center = interface_at;
  return d;
}

InitialData InitialData::constant(double value) {
  InitialData d;
  d.kind = Kind::constant;
  d.height = value;
  return d;
}

double InitialData::operator()(double x) const {
  switch (kind) {
    case Kind::compact_bump:
      return std::abs(x - center) <= width ? height : 0.0;
    case Kind::exp_tail:
      return height * std::exp(-rate * std::abs(x - center));
    case Kind::front_like:
      return height * 0.5 * (1.0 - std::tanh(x - center));
    case Kind::constant:
      return height;
  }
  return 0.0;
}

void InitialData::validate() const {
  if (!(height > 0.0))
    throw InvalidArgument(
        "initial data: amplitude must be positive (identically zero data is "
        "not admissible)");
  if (kind == Kind::compact_bump && !(width > 0.0))
    throw InvalidArgument("initial data: bump half-width must be positive");
  if (kind == Kind::exp_tail && !(rate > 0.0))
    throw InvalidArgument("initial data: exp_tail rate must be positive");
}

// ---------------------------------------------------------------------------
// tail_integral
// ---------------------------------------------------------------------------

TailIntegral tail_integral(const InitialData& init, double rate,
                           const pde::Grid1D& grid) {
  grid.validate();
  init.validate();
  TailIntegral out;

  const double dx = grid.dx();
  double s = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    const double f = std::exp(-rate * grid.x(i)) * init(grid.x(i));
    s += (i == 0 || i == grid.n - 1) ? 0.5 * f : f;
  }
  out.value = s * dx;

  const double a = grid.x_min, b = grid.x_max, h = init.height;
  switch (init.kind) {
    case InitialData::Kind::compact_bump: {
      // closed form for any part of the hat sticking out of the grid
      auto seg = [&](double lo, double hi) {
        if (hi <= lo) return 0.0;
        if (rate == 0.0) return h * (hi - lo);
        return h * (std::exp(-rate * lo) - std::exp(-rate * hi)) / rate;
      };
      const double lo = init.center - init.width;
      const double hi = init.center + init.width;
      out.tail_bound = seg(lo, std::min(a, hi)) + seg(std::max(b, lo), hi);
      break;
    }
    case InitialData::Kind::exp_tail: {
      // u0 <= h e^{rate0 (x - peak)} and u0 <= h e^{-rate0 (x - peak)} hold
      // on the whole line, so each remainder has a one-exponential bound.
      const double l0 = init.rate;
      if (l0 - rate <= 0.0 || l0 + rate <= 0.0) {
        out.finite = false;
        break;
      }
      const double left = h * std::exp(-l0 * init.center) *
                          std::exp((l0 - rate) * a) / (l0 - rate);
      const double right = h * std::exp(l0 * init.center) *
                           std::exp(-(l0 + rate) * b) / (l0 + rate);
      out.tail_bound = left + right;
      break;
    }
    case InitialData::Kind::front_like: {
      // level plateau to the left, e^{-2x}-type decay to the right
      if (rate >= 0.0 || rate <= -2.0) {
        out.finite = false;
        break;
      }
      const double left = h * std::exp(-rate * a) / (-rate);
      const double right = h * std::exp(2.0 * init.center) *
                           std::exp(-(2.0 + rate) * b) / (2.0 + rate);
      out.tail_bound = left + right;
      break;
    }
    case InitialData::Kind::constant:
      // one side always diverges, whatever the sign of the rate
      out.finite = false;
      break;
  }

  if (out.finite)
    out.value += out.tail_bound;
  else
    out.tail_bound = kInf;
  return out;
}

// ---------------------------------------------------------------------------
// run_ivp
// ---------------------------------------------------------------------------

IvpResult run_ivp(const env::PeriodicEnvironment& e, double c,
                  const InitialData& init, const pde::Grid1D& grid,
                  const pde::StepperConfig& cfg, long horizon_periods) {
  grid.validate();
  init.validate();
  if (horizon_periods < 1)
    throw InvalidArgument("run_ivp: horizon must be at least one period");

  const auto alpha = solve_alpha(e);

  IvpResult out;
  out.trace.level = 0.5 * alpha.min_value();
  out.trace.period = e.period;

  pde::Field u0 =
      pde::make_field(grid, 0.0, [&init](double x) { return init(x); });
  pde::BoundaryPolicy bc{pde::BoundarySide::neumann_zero(),
                         pde::BoundarySide::neumann_zero()};
  pde::Stepper st(e, pde::Frame::lab(c), bc, cfg, std::move(u0));

  const double margin = 0.1 * (grid.x_max - grid.x_min);
  auto record = [&](long k) {
    const auto& v = st.field().values;
    const double t = static_cast<double>(k) * e.period;
    const double xr = crossing_right(grid, v, out.trace.level);
    const double xl = crossing_left(grid, v, out.trace.level);
    out.trace.t.push_back(t);
    out.trace.x_right.push_back(xr);
    out.trace.x_left.push_back(xl);
    out.trace.sup_u.push_back(*std::max_element(v.begin(), v.end()));
    out.trace.mass.push_back(trapezoid_mass(st.field()));
    if (!out.trace.contaminated &&
        (xr > grid.x_max - margin || xl < grid.x_min + margin)) {
      out.trace.contaminated = true;
      out.trace.note =
          strf("front entered the 10%% boundary margin at t = %g", t);
    }
  };

  record(0);
  for (long k = 1; k <= horizon_periods; ++k) {
    st.advance_periods(1);
    record(k);
  }
  out.final = st.field();
  return out;
}

// ---------------------------------------------------------------------------
// fit_front_speed
// ---------------------------------------------------------------------------

SpeedFit fit_front_speed(const FrontTrace& trace, double t1, double t2,
                         FrontSide side) {
  if (!(t2 > t1) || !(t1 >= 10.0 * trace.period - 1e-12))
    throw InvalidArgument(
        strf("front-speed fit: window needs t2 > t1 >= 10 T = %g "
             "(got [%g, %g])",
             10.0 * trace.period, t1, t2));

  std::vector<double> ts, xs;
  for (size_t k = 0; k < trace.size(); ++k) {
    const double t = trace.t[k];
    if (t < t1 - 1e-12 || t > t2 + 1e-12 || !(t > 0.0)) continue;
    const double X =
        side == FrontSide::right ? trace.x_right[k] : -trace.x_left[k];
    if (!std::isfinite(X)) continue;
    ts.push_back(t);
    xs.push_back(X);
  }
  if (ts.size() < 20)
    throw InsufficientData(
        strf("front-speed fit: needs >= 20 finite samples in the window "
             "(got %zu)",
             ts.size()));

  std::vector<double> f1(ts.size()), ones(ts.size(), 1.0);
  for (size_t i = 0; i < ts.size(); ++i) f1[i] = -std::log(ts[i]);
  SpeedFit fit;
  const auto coef = num::lsq3(ts, f1, ones, xs, &fit.rms);
  fit.c_hat = coef[0];
  fit.gamma_hat = coef[1];
  fit.intercept = coef[2];
  fit.t1 = t1;
  fit.t2 = t2;
  fit.n_used = static_cast<long>(ts.size());
  return fit;
}

SpeedFit fit_front_speed(const FrontTrace& trace, FrontSide side) {
  if (trace.t.empty())
    throw InsufficientData("front-speed fit: empty trace");
  const double t_end = trace.t.back();
  return fit_front_speed(trace, t_end / 3.0, t_end, side);
}

// ---------------------------------------------------------------------------
// wave_attraction_error
// ---------------------------------------------------------------------------

AttractionReport wave_attraction_error(const env::PeriodicEnvironment& e,
                                       double c, const InitialData& init,
                                       const waves::WaveProfile& U,
                                       const pde::Grid1D& grid,
                                       const pde::StepperConfig& cfg,
                                       double horizon) {
  grid.validate();
  init.validate();
  const double T = e.period;
  const double periods = horizon / T;
  const long K = std::lround(periods);
  if (K < 1 || std::abs(periods - static_cast<double>(K)) > 1e-9)
    throw PhaseMismatch(
        strf("attraction error: horizon %g is not a whole number of periods "
             "(T = %g)",
             horizon, T));
  if (U.kind != waves::WaveProfile::Kind::kpp)
    throw InvalidArgument(
        "attraction error: the reference must be a front (kpp) profile");
  if (std::abs(U.c - c) > 1e-12)
    throw InvalidArgument(strf(
        "attraction error: profile speed %.6g does not match run speed %.6g",
        U.c, c));
  if (std::abs(U.period - T) > 1e-12)
    throw InvalidArgument(
        "attraction error: profile and environment periods differ");
  const auto sd = waves::compute_speed_data(e);
  if (!(std::abs(c) < sd.c_star))
    throw InvalidArgument(strf(
        "attraction error: needs |c| < c_star = %.6g (got c = %.6g)",
        sd.c_star, c));

  AttractionReport rep;
  rep.mu = 0.5 * sd.c_star;

  pde::Field u0 =
      pde::make_field(grid, 0.0, [&init](double x) { return init(x); });
  pde::BoundaryPolicy bc{pde::BoundarySide::neumann_zero(),
                         pde::BoundarySide::neumann_zero()};
  pde::Stepper st(e, pde::Frame::lab(c), bc, cfg, std::move(u0));

  auto record = [&](long k) {
    const double t = static_cast<double>(k) * T;
    const double x_lo = -rep.mu * t;
    const auto& v = st.field().values;
    double err = 0.0;
    for (int i = 0; i < grid.n; ++i) {
      const double x = grid.x(i);
      if (x < x_lo) continue;
      err = std::max(err, std::abs(v[static_cast<size_t>(i)] -
                                   U.value_at(t, x - c * t)));
    }
    rep.t.push_back(t);
    rep.err.push_back(err);
  };

  record(0);
  for (long k = 1; k <= K; ++k) {
    st.advance_periods(1);
    record(k);
  }

  // Exponential-rate fit: only meaningful for front-like data, and only when
  // the reaction is strictly self-limiting (sampled g_u bounded away from 0).
  if (init.kind == InitialData::Kind::front_like) {
    const double u_hi = U.alpha.max_value();
    const double hu = 1e-5 * std::max(1.0, u_hi);
    double gu_max = -kInf;
    for (int jt = 0; jt < 9; ++jt) {
      const double t = T * jt / 9.0;
      for (double xi = -30.0; xi <= 30.0; xi += 5.0)
        for (double u : {0.0, 0.5 * u_hi, u_hi}) {
          const double gu =
              (e.eval(t, xi, u + hu) - e.eval(t, xi, std::max(0.0, u - hu))) /
              (u - hu >= 0.0 ? 2.0 * hu : hu);
          gu_max = std::max(gu_max, gu);
        }
    }
    if (gu_max < -1e-8) {
      std::vector<double> ft, fy;
      const double t_end = rep.t.back();
      for (size_t k = 0; k < rep.t.size(); ++k) {
        if (rep.t[k] < t_end / 3.0 || !(rep.err[k] > 0.0)) continue;
        ft.push_back(rep.t[k]);
        fy.push_back(std::log(rep.err[k]));
      }
      if (ft.size() >= 5) {
        const LineFit lf = fit_line(ft, fy);
        rep.rate_fitted = true;
        rep.sigma_hat = -lf.slope;
        rep.log_rms = lf.rms;
      }
    }
  }
  return rep;
}

}  // namespace rdshift::dynamics
