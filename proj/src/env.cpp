#include "rdshift/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>
#include <vector>

#include "rdshift/errors.hpp"
#include "rdshift/numerics.hpp"
#include "rdshift/pode.hpp"

namespace rdshift::env {

namespace {

/// Seasonal factor with the phase reduced mod 1 before the sine, so the
/// T-periodicity of every shipped kind holds bitwise in floating point.
inline double seasonal(double t, double T, double amp, double phase) {
  if (amp == 0.0) return 0.0;
  return amp * std::sin(2.0 * num::pi * num::frac(t / T) + phase);
}

struct TanhParams {
  double T, r0, s0, ell, amp, phase;
  double r(double t) const { return r0 + seasonal(t, T, amp, phase); }
};

struct PiecewiseParams {
  double T, r0, s0, ell, amp, phase, q;
  double r(double t) const { return r0 + seasonal(t, T, amp, phase); }
  // monotone transition profile with algebraic |xi|^-q tails on both sides:
  // w -> 1 (xi -> -inf), w(0) = 1/2, w -> 0 (xi -> +inf); C^1 at the seam.
  double w(double xi) const {
    const double z = xi / ell;
    if (z <= 0) return 1.0 - 0.5 * std::pow(1.0 - z, -q);
    return 0.5 * std::pow(1.0 + z, -q);
  }
};

}  // namespace

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::tanh_fisher: return "tanh_fisher";
    case Kind::piecewise_fisher: return "piecewise_fisher";
    case Kind::sis_derived: return "sis_derived";
  }
  return "?";
}

Kind kind_from_name(const std::string& name) {
  if (name == "tanh_fisher") return Kind::tanh_fisher;
  if (name == "piecewise_fisher") return Kind::piecewise_fisher;
  if (name == "sis_derived") return Kind::sis_derived;
  throw InvalidArgument("unknown environment kind: " + name);
}

double PeriodicEnvironment::eval(double t, double xi, double u) const {
  const double uc = std::clamp(u, 0.0, u_clamp_cap());
  if (xi < -limit_cutoff) return limit_left(t, uc);
  if (xi > limit_cutoff) return limit_right(t, uc);
  return g(t, xi, uc);
}

double PeriodicEnvironment::eval_extended(double t, double xi, double u) const {
  if (!affine()) return eval(t, xi, u);
  return eval_base(t, xi) - slope(t) * u;
}

double PeriodicEnvironment::eval_base(double t, double xi) const {
  if (!affine()) throw InvalidArgument("eval_base: environment is not affine");
  const double xc = std::clamp(xi, -limit_cutoff, limit_cutoff);
  return base(t, xc);
}

PeriodicEnvironment build_environment(const EnvironmentParams& p) {
  if (!(p.period > 0)) throw InvalidArgument("environment: period must be positive");
  if (!(p.ell > 0)) throw InvalidArgument("environment: ell must be positive");

  PeriodicEnvironment e;
  e.period = p.period;
  e.label = kind_name(p.kind);

  switch (p.kind) {
    case Kind::tanh_fisher: {
      TanhParams tp{p.period, p.r_offset, p.s_offset, p.ell, p.seasonal_amp,
                    p.seasonal_phase};
      e.limit_cutoff = 40.0 * p.ell;
      e.m_cap = p.r_offset + std::abs(p.seasonal_amp);
      if (!(e.m_cap > 0))
        throw InvalidArgument("tanh_fisher: favorable growth must be positive");
      e.decay = p.decay.value_or(DecayMeta{1.0, 2});
      e.base = [tp](double t, double xi) {
        const double th = std::tanh(xi / tp.ell);
        return 0.5 * (tp.r(t) * (1.0 - th) + tp.s0 * (1.0 + th));
      };
      e.slope = [](double) { return 1.0; };
      e.limit_left = [tp](double t, double u) { return tp.r(t) - u; };
      e.limit_right = [tp](double, double u) { return tp.s0 - u; };
      auto base = e.base;
      e.g = [base](double t, double xi, double u) { return base(t, xi) - u; };
      break;
    }
    case Kind::piecewise_fisher: {
      PiecewiseParams pp{p.period, p.r_offset, p.s_offset, p.ell,
                         p.seasonal_amp, p.seasonal_phase, p.tail_power};
      if (!(pp.q > 0)) throw InvalidArgument("piecewise_fisher: tail_power must be positive");
      const double span = p.r_offset + std::abs(p.seasonal_amp) - p.s_offset;
      e.limit_cutoff = p.ell * std::pow(0.5 * span / 5e-13, 1.0 / pp.q);
      e.m_cap = p.r_offset + std::abs(p.seasonal_amp);
      e.decay = p.decay.value_or(DecayMeta{1.0, 2});
      e.base = [pp](double t, double xi) {
        return pp.s0 + (pp.r(t) - pp.s0) * pp.w(xi);
      };
      e.slope = [](double) { return 1.0; };
      e.limit_left = [pp](double t, double u) { return pp.r(t) - u; };
      e.limit_right = [pp](double, double u) { return pp.s0 - u; };
      auto base = e.base;
      e.g = [base](double t, double xi, double u) { return base(t, xi) - u; };
      break;
    }
    case Kind::sis_derived: {
      // endemic total-population orbit N* of N' = N (B(t) - mu(t, N))
      if (!(p.mu1 > 0)) throw InvalidArgument("sis_derived: mu1 must be positive");
      const double T = p.period;
      auto B = [p, T](double t) {
        return p.birth0 + seasonal(t, T, p.birth_amp, p.birth_phase);
      };
      auto hN = [B, p](double t, double N) { return B(t) - p.mu0 - p.mu1 * N; };
      pode::OrbitOptions opt;
      opt.hi = 2.0 * std::max(1.0, (p.birth0 + std::abs(p.birth_amp) - p.mu0) / p.mu1);
      auto n_star = std::make_shared<const pode::PeriodicOrbit>(
          pode::solve_periodic_orbit(hN, T, opt));

      auto omega = [p, T](double t) {
        return p.l * (p.omega0 + seasonal(t, T, p.omega_amp, p.omega_phase));
      };
      auto gamma = [p, T](double t) {
        return p.gamma0 + seasonal(t, T, p.gamma_amp, 0.0);
      };
      const double ell = p.ell;
      auto Nprof = [n_star, ell](double t, double xi) {
        return n_star->value_at(t) * 0.5 * (1.0 - std::tanh(xi / ell));
      };
      e.limit_cutoff = 40.0 * p.ell;
      e.decay = p.decay.value_or(DecayMeta{1.0, 2});
      e.base = [Nprof, omega, gamma, p](double t, double xi) {
        const double N = Nprof(t, xi);
        return omega(t) * N - (p.mu0 + p.mu1 * N) - gamma(t);
      };
      e.slope = omega;
      e.limit_left = [n_star, omega, gamma, p](double t, double u) {
        const double N = n_star->value_at(t);
        return omega(t) * N - (p.mu0 + p.mu1 * N) - gamma(t) - omega(t) * u;
      };
      e.limit_right = [omega, gamma, p](double t, double u) {
        return -p.mu0 - gamma(t) - omega(t) * u;
      };
      auto base = e.base;
      e.g = [base, omega](double t, double xi, double u) {
        return base(t, xi) - omega(t) * u;
      };
      // cap from the homogeneous limit ODE I' = I (A(t) - omega(t) I)
      double a_max = 0.0, w_min = omega(0.0);
      for (int k = 0; k < 64; ++k) {
        const double t = T * k / 64.0;
        a_max = std::max(a_max, e.limit_left(t, 0.0));
        w_min = std::min(w_min, omega(t));
      }
      if (!(w_min > 0)) throw InvalidArgument("sis_derived: omega must stay positive");
      e.m_cap = std::max(a_max / w_min, n_star->max_value());
      break;
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// assumption checks
// ---------------------------------------------------------------------------

namespace {

std::vector<double> xi_samples(const PeriodicEnvironment& e, int n_band) {
  std::vector<double> xs;
  const double band = std::min(10.0, 0.9 * e.limit_cutoff);
  for (int i = 0; i < n_band; ++i)
    xs.push_back(-band + 2.0 * band * i / (n_band - 1));
  if (e.limit_cutoff > band * 1.5) {
    for (int k = 1; k <= 6; ++k) {
      const double x =
          band * std::pow(0.999 * e.limit_cutoff / band, k / 6.0);
      xs.push_back(x);
      xs.push_back(-x);
    }
  }
  // clamped exterior points keep the monotone check honest across the cutoff
  xs.push_back(-1.2 * e.limit_cutoff);
  xs.push_back(1.2 * e.limit_cutoff);
  std::sort(xs.begin(), xs.end());
  return xs;
}

}  // namespace

bool ValidationReport::pass() const {
  bool ok = periodicity.pass && monotone_xi.pass && monotone_u.pass &&
            left_mean.pass && cap_nonpositive.pass && right_mean.pass &&
            limit_consistency.pass;
  if (decay_c4) ok = ok && decay_c4->pass;
  return ok;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  auto line = [&os](const char* name, const CheckResult& c) {
    char buf[224];
    std::snprintf(buf, sizeof buf, "%-18s %s  worst=%+.3e at (t=%.3g, xi=%.3g, u=%.3g)%s%s",
                  name, c.pass ? "PASS" : "FAIL", c.worst, c.at_t, c.at_xi,
                  c.at_u, c.note.empty() ? "" : "  ", c.note.c_str());
    os << buf << "\n";
  };
  line("periodicity:", periodicity);
  line("monotone_xi:", monotone_xi);
  line("monotone_u:", monotone_u);
  line("left_mean:", left_mean);
  line("cap_nonpositive:", cap_nonpositive);
  line("right_mean:", right_mean);
  line("limit_consistency:", limit_consistency);
  if (decay_c4) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-18s %s  fitted slope=%.3f  %s",
                  "decay_c4:", decay_c4->pass ? "PASS" : "FAIL", c4_slope,
                  decay_c4->note.c_str());
    os << buf << "\n";
  }
  return os.str();
}

ValidationReport validate_assumptions(const PeriodicEnvironment& e,
                                      const SamplingPlan& plan) {
  ValidationReport rep;
  const double T = e.period;
  const double u_max = plan.u_max > 0 ? plan.u_max : e.m_cap;
  auto xs = xi_samples(e, plan.n_xi);

  std::vector<double> ts(static_cast<size_t>(plan.n_t));
  for (int i = 0; i < plan.n_t; ++i) ts[static_cast<size_t>(i)] = T * i / plan.n_t;
  std::vector<double> us(static_cast<size_t>(plan.n_u));
  for (int i = 0; i < plan.n_u; ++i)
    us[static_cast<size_t>(i)] = u_max * i / (plan.n_u - 1);

  double scale = 1.0;
  for (double t : ts)
    for (double x : xs) scale = std::max(scale, std::abs(e.eval(t, x, 0.0)));

  // periodicity
  for (double t : ts)
    for (double x : xs)
      for (double u : us) {
        const double d = std::abs(e.eval(t + T, x, u) - e.eval(t, x, u));
        if (d > rep.periodicity.worst) {
          rep.periodicity.worst = d;
          rep.periodicity.at_t = t;
          rep.periodicity.at_xi = x;
          rep.periodicity.at_u = u;
        }
      }
  rep.periodicity.pass = rep.periodicity.worst <= 4e-15 * scale;

  // monotone in xi / u
  const double mono_tol = 1e-13 * scale;
  for (double t : ts)
    for (double u : us) {
      for (size_t i = 0; i + 1 < xs.size(); ++i) {
        const double rise = e.eval(t, xs[i + 1], u) - e.eval(t, xs[i], u);
        if (rise > rep.monotone_xi.worst) {
          rep.monotone_xi.worst = rise;
          rep.monotone_xi.at_t = t;
          rep.monotone_xi.at_xi = xs[i + 1];
          rep.monotone_xi.at_u = u;
        }
      }
    }
  rep.monotone_xi.pass = rep.monotone_xi.worst <= mono_tol;
  for (double t : ts)
    for (double x : xs)
      for (size_t i = 0; i + 1 < us.size(); ++i) {
        const double rise = e.eval(t, x, us[i + 1]) - e.eval(t, x, us[i]);
        if (rise > rep.monotone_u.worst) {
          rep.monotone_u.worst = rise;
          rep.monotone_u.at_t = t;
          rep.monotone_u.at_xi = x;
          rep.monotone_u.at_u = us[i + 1];
        }
      }
  rep.monotone_u.pass = rep.monotone_u.worst <= mono_tol;

  // sign conditions on the limits
  rep.left_mean.worst =
      num::mean_over_period([&](double t) { return e.limit_left(t, 0.0); }, T);
  rep.left_mean.pass = rep.left_mean.worst > 0;
  rep.left_mean.note = "mean of g(t,-inf,0)";

  for (double t : ts) {
    const double v = e.limit_left(t, e.m_cap);
    if (v > rep.cap_nonpositive.worst) {
      rep.cap_nonpositive.worst = v;
      rep.cap_nonpositive.at_t = t;
    }
  }
  rep.cap_nonpositive.pass = rep.cap_nonpositive.worst <= 1e-12 * scale;
  rep.cap_nonpositive.at_u = e.m_cap;

  rep.right_mean.worst =
      num::mean_over_period([&](double t) { return e.limit_right(t, 0.0); }, T);
  rep.right_mean.pass = rep.right_mean.worst < 0;
  rep.right_mean.note = "mean of g(t,+inf,0)";

  // stored limits vs g evaluated just inside the cutoff
  const double x_in = 0.999 * e.limit_cutoff;
  for (double t : ts)
    for (double u : us) {
      const double dl = std::abs(e.eval(t, -x_in, u) - e.limit_left(t, u));
      const double dr = std::abs(e.eval(t, x_in, u) - e.limit_right(t, u));
      if (std::max(dl, dr) > rep.limit_consistency.worst) {
        rep.limit_consistency.worst = std::max(dl, dr);
        rep.limit_consistency.at_t = t;
        rep.limit_consistency.at_xi = dl > dr ? -x_in : x_in;
        rep.limit_consistency.at_u = u;
      }
    }
  rep.limit_consistency.pass =
      rep.limit_consistency.worst <= e.limit_tol + 4e-15 * scale;

  // algebraic decay certificate toward -inf
  if (e.decay) {
    CheckResult c4;
    const double power = e.decay->r0 + e.decay->m;
    const double x_lo = 4.0, x_hi = 0.98 * e.limit_cutoff;
    std::vector<double> lx, lp;
    for (int k = 0; k < plan.n_c4; ++k) {
      const double x = x_lo * std::pow(x_hi / x_lo, static_cast<double>(k) /
                                                        (plan.n_c4 - 1));
      double dev = 0.0;
      for (double t : ts)
        dev = std::max(dev, std::abs(e.eval(t, -x, 0.0) - e.limit_left(t, 0.0)));
      const double prod = dev * std::pow(x, power);
      if (prod > 1e-300) {
        lx.push_back(std::log(x));
        lp.push_back(std::log(prod));
      }
    }
    if (lx.size() < 6) {
      c4.pass = true;
      c4.note = "decay product vanishes on the sampled window";
      rep.c4_slope = -99.0;
    } else {
      // fit the deeper half of the window
      const size_t h = lx.size() / 2;
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      const size_t n = lx.size() - h;
      for (size_t i = h; i < lx.size(); ++i) {
        sx += lx[i];
        sy += lp[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * lp[i];
      }
      const double slope =
          (static_cast<double>(n) * sxy - sx * sy) /
          (static_cast<double>(n) * sxx - sx * sx);
      rep.c4_slope = slope;
      c4.pass = slope < -0.1;
      char buf[96];
      std::snprintf(buf, sizeof buf, "|g - g(-inf)| * |xi|^%.3g, %zu samples",
                    power, lx.size());
      c4.note = buf;
      c4.worst = slope;
    }
    rep.decay_c4 = c4;
  }
  return rep;
}

}  // namespace rdshift::env
