#include "rdshift/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "rdshift/dynamics.hpp"
#include "rdshift/env.hpp"
#include "rdshift/epi.hpp"
#include "rdshift/errors.hpp"
#include "rdshift/numerics.hpp"
#include "rdshift/pde.hpp"
#include "rdshift/pode.hpp"
#include "rdshift/report.hpp"
#include "rdshift/waves.hpp"

namespace rdshift::experiments {

namespace {

std::string strf(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

const char* error_name(const std::exception& ex) {
  if (dynamic_cast<const AssumptionViolation*>(&ex)) return "AssumptionViolation";
  if (dynamic_cast<const NoSignChange*>(&ex)) return "NoSignChange";
  if (dynamic_cast<const RootBracketFailure*>(&ex)) return "RootBracketFailure";
  if (dynamic_cast<const NotZeroMean*>(&ex)) return "NotZeroMean";
  if (dynamic_cast<const CflViolation*>(&ex)) return "CflViolation";
  if (dynamic_cast<const NonFiniteValue*>(&ex)) return "NonFiniteValue";
  if (dynamic_cast<const EnvelopeInvalid*>(&ex)) return "EnvelopeInvalid";
  if (dynamic_cast<const ParamsInfeasible*>(&ex)) return "ParamsInfeasible";
  if (dynamic_cast<const NonConvergence*>(&ex)) return "NonConvergence";
  if (dynamic_cast<const DegenerateWave*>(&ex)) return "DegenerateWave";
  if (dynamic_cast<const MonotonicityViolation*>(&ex))
    return "MonotonicityViolation";
  if (dynamic_cast<const InsufficientData*>(&ex)) return "InsufficientData";
  if (dynamic_cast<const PhaseMismatch*>(&ex)) return "PhaseMismatch";
  if (dynamic_cast<const DegenerateTransmission*>(&ex))
    return "DegenerateTransmission";
  if (dynamic_cast<const ParseError*>(&ex)) return "ParseError";
  if (dynamic_cast<const ValidationError*>(&ex)) return "ValidationError";
  if (dynamic_cast<const InvalidArgument*>(&ex)) return "InvalidArgument";
  return "error";
}

std::string describe(const std::exception& ex) {
  return std::string(error_name(ex)) + ": " + ex.what();
}

/// Everything a driver produces, still in memory.
struct Bundle {
  report::KeyValue kv;
  std::string extra;  ///< appended after the kv block (sweep sections)
  std::vector<Artifact> artifacts;
  int exit_code = 0;
  std::string error;
};

pde::Grid1D grid_of(const config::ExperimentConfig& cfg) {
  pde::Grid1D g;
  g.x_min = cfg.domain.x_min;
  g.x_max = cfg.domain.x_max;
  g.n = cfg.domain.n;
  return g;
}

pde::StepperConfig stepper_of(const config::ExperimentConfig& cfg) {
  pde::StepperConfig s;
  s.steps_per_period = cfg.time.dt_divisor;
  return s;
}

dynamics::InitialData initial_of(const config::ExperimentSection& e) {
  dynamics::InitialData init;
  if (e.init == "bump") {
    init = dynamics::InitialData::bump(e.init_height, e.init_center,
                                       e.init_width);
  } else if (e.init == "exp_tail") {
    init = dynamics::InitialData::exp_tail(e.init_rate, e.init_height,
                                           e.init_center);
  } else if (e.init == "front") {
    init = dynamics::InitialData::front(e.init_height, e.init_center);
  } else {
    init = dynamics::InitialData::constant(e.init_height);
  }
  init.validate();
  return init;
}

/// "dir/trace.csv" + "_c=-3" -> "dir/trace_c=-3.csv".
std::string with_suffix(const std::string& path, const std::string& suffix) {
  const size_t slash = path.find_last_of('/');
  const size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

std::string value_token(double v) { return strf("%g", v); }

void add_artifact(Bundle& b, const std::string& path, std::string content) {
  if (!path.empty()) b.artifacts.push_back({path, std::move(content)});
}

// ---------------------------------------------------------------------------
// Shared renderers
// ---------------------------------------------------------------------------

std::string wave_csv(const waves::WaveProfile& W) {
  report::Table t({"t", "x", "U"});
  for (size_t j = 0; j < W.U.size(); ++j)
    for (int i = 0; i < W.grid.n; ++i)
      t.add_numbers({W.t_mesh[j], W.grid.x(i), W.U[j][i]});
  return t.str();
}

report::Series wave_slice(const waves::WaveProfile& W, const std::string& label) {
  report::Series s;
  s.label = label;
  s.x.reserve(W.grid.n);
  s.y.reserve(W.grid.n);
  for (int i = 0; i < W.grid.n; ++i) {
    s.x.push_back(W.grid.x(i));
    s.y.push_back(W.U[0][i]);
  }
  return s;
}

report::Series fn_series(const pde::Grid1D& grid,
                         const std::function<double(double)>& f,
                         const std::string& label) {
  report::Series s;
  s.label = label;
  for (int i = 0; i < grid.n; ++i) {
    s.x.push_back(grid.x(i));
    s.y.push_back(f(grid.x(i)));
  }
  return s;
}

/// Trajectory of a nonexistence probe: how the interior window drained.
void add_probe_artifacts(Bundle& b, const config::ExperimentConfig& cfg,
                         const waves::IterationStats& stats) {
  const size_t n =
      std::min(stats.sup_per_period.size(), stats.change_per_period.size());
  if (n == 0) return;
  report::Table t({"period", "window_sup", "change"});
  report::Series s;
  s.label = "window sup";
  for (size_t k = 0; k < n; ++k) {
    t.add_numbers({static_cast<double>(k + 1), stats.sup_per_period[k],
                   stats.change_per_period[k]});
    s.x.push_back(static_cast<double>(k + 1));
    s.y.push_back(stats.sup_per_period[k]);
  }
  add_artifact(b, cfg.output.csv, t.str());
  if (!cfg.output.svg.empty())
    add_artifact(b, cfg.output.svg,
                 report::render_svg("nonexistence probe", "period",
                                    "window sup", {s}));
}

void set_wave_stats(Bundle& b, const waves::WaveProfile& W) {
  b.kv.set_number("residual", W.residual);
  b.kv.set_number("left_dev", W.left_dev);
  b.kv.set_number("right_dev", W.right_dev);
  b.kv.set_number("interior_sup", W.interior_sup);
  b.kv.set_number("mono_violation", W.mono_violation);
  b.kv.set_number("window_left", W.window_left);
  b.kv.set_number("sup", W.sup());
  b.kv.set_number("periods", static_cast<double>(W.periods));
}

void apply_checks(Bundle& b, const config::ExperimentSection& e) {
  if (e.expects.empty()) return;
  bool all = true;
  for (const auto& [name, want] : e.expects) {
    const double* got = b.kv.number(name);
    std::string verdict;
    if (!got) {
      verdict = "FAIL (missing report entry)";
      all = false;
    } else {
      const bool ok = std::fabs(*got - want) <= e.expect_tol;
      all = all && ok;
      verdict = strf("%s (expected %s, got %s, tol %g)", ok ? "PASS" : "FAIL",
                     report::format_number(want).c_str(),
                     report::format_number(*got).c_str(), e.expect_tol);
    }
    b.kv.set("check_" + name, verdict);
  }
  b.kv.set("checks_status", all ? "pass" : "fail");
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

Bundle run_cstar(const config::ExperimentConfig& cfg) {
  Bundle b;
  const env::PeriodicEnvironment e = env::build_environment(cfg.environment);
  const waves::SpeedData sd = waves::compute_speed_data(e);
  const double c = cfg.experiment.c;

  b.kv.set("experiment", "cstar");
  b.kv.set("environment", e.label);
  b.kv.set_number("period", e.period);
  b.kv.set_fixed("c_star", sd.c_star);
  b.kv.set_fixed("g_minus_mean", sd.g_minus_mean);
  b.kv.set_fixed("g_plus_mean", sd.g_plus_mean);
  b.kv.set_number("c", c);
  try {
    b.kv.set_fixed("lambda_1c", sd.lambda_1c(c));
  } catch (const InvalidArgument&) {
    b.kv.set("lambda_1c", "undefined (|c| < c_star)");
  }
  b.kv.set_fixed("mu_c", sd.mu_c(c));
  try {
    b.kv.set_fixed("mu_1", sd.mu_1(c));
  } catch (const InvalidArgument&) {
    b.kv.set("mu_1", "undefined (c > -c_star)");
  }

  pode::OrbitOptions oo;
  oo.hi = std::max(10.0, 2.0 * e.m_cap);
  const pode::PeriodicOrbit alpha = pode::solve_periodic_orbit(
      [&e](double t, double u) { return e.limit_left(t, u); }, e.period, oo);
  b.kv.set_number("alpha_min", alpha.min_value());
  b.kv.set_number("alpha_max", alpha.max_value());
  b.kv.set_number("alpha_mean", num::mean_over_period(
      [&alpha](double t) { return alpha.value_at(t); }, alpha.period));

  if (!cfg.output.csv.empty()) {
    report::Table t({"t", "value"});
    const int m = alpha.mesh();
    for (int j = 0; j <= m; ++j)
      t.add_numbers({j * alpha.period / m, alpha.values[j]});
    add_artifact(b, cfg.output.csv, t.str());
  }
  if (!cfg.output.svg.empty()) {
    report::Series s;
    s.label = "alpha(t)";
    const int m = alpha.mesh();
    for (int j = 0; j <= m; ++j) {
      s.x.push_back(j * alpha.period / m);
      s.y.push_back(alpha.values[j]);
    }
    add_artifact(b, cfg.output.svg,
                 report::render_svg("carrying orbit", "t", "alpha", {s}));
  }
  return b;
}

Bundle run_kpp_wave(const config::ExperimentConfig& cfg) {
  Bundle b;
  const env::PeriodicEnvironment e = env::build_environment(cfg.environment);
  const waves::SpeedData sd = waves::compute_speed_data(e);
  const pde::Grid1D grid = grid_of(cfg);
  const pde::StepperConfig scfg = stepper_of(cfg);
  const double c = cfg.experiment.c;

  b.kv.set("experiment", "kpp_wave");
  b.kv.set("environment", e.label);
  b.kv.set_number("period", e.period);
  b.kv.set_number("c", c);
  b.kv.set_fixed("c_star", sd.c_star);

  waves::KppOptions opt;
  opt.max_periods = cfg.experiment.max_periods;
  waves::IterationStats stats;
  waves::WaveProfile W;
  try {
    W = waves::compute_kpp_wave(e, c, grid, scfg, cfg.experiment.tolerance,
                                opt, &stats);
  } catch (const DegenerateWave& ex) {
    b.kv.set("result", "nonexistent (DegenerateWave)");
    b.kv.set("reason", ex.what());
    b.kv.set_number("periods", static_cast<double>(stats.periods));
    add_probe_artifacts(b, cfg, stats);
    return b;
  }

  b.kv.set("result", "converged");
  set_wave_stats(b, W);
  add_artifact(b, cfg.output.csv, wave_csv(W));
  if (!cfg.output.svg.empty()) {
    std::vector<report::Series> series;
    series.push_back(wave_slice(W, "U(0,x)"));
    const double a0 = W.alpha.value_at(0.0);
    series.push_back(fn_series(grid, [a0](double) { return a0; }, "alpha(0)"));
    try {
      waves::EnvelopeParams ep;
      ep.x_min = grid.x_min;
      ep.x_max = grid.x_max;
      ep.dx = grid.dx();
      const waves::EnvelopeRecipe sub =
          waves::build_envelope(waves::EnvelopeKind::sub_sine_bump, e, c, ep);
      series.push_back(fn_series(
          grid, [&sub](double x) { return sub.evaluator(0.0, x); },
          "sub-solution bump"));
    } catch (const ParamsInfeasible&) {
      // no compact sub-solution in this speed regime; plot the wave alone
    }
    add_artifact(b, cfg.output.svg,
                 report::render_svg(strf("forced front, c = %g", c), "x", "U",
                                    series));
  }
  return b;
}

Bundle run_pulse_wave(const config::ExperimentConfig& cfg) {
  Bundle b;
  const env::PeriodicEnvironment e = env::build_environment(cfg.environment);
  const waves::SpeedData sd = waves::compute_speed_data(e);
  const pde::Grid1D grid = grid_of(cfg);
  const pde::StepperConfig scfg = stepper_of(cfg);
  const double c = cfg.experiment.c;

  b.kv.set("experiment", "pulse_wave");
  b.kv.set("environment", e.label);
  b.kv.set_number("period", e.period);
  b.kv.set_number("c", c);
  b.kv.set_fixed("c_star", sd.c_star);
  b.kv.set_number("shift", cfg.experiment.shift);

  waves::PulseOptions opt;
  opt.max_periods = cfg.experiment.max_periods;
  opt.shift = cfg.experiment.shift;
  waves::IterationStats stats;
  waves::WaveProfile W;
  try {
    W = waves::compute_pulse_wave(e, c, grid, scfg, cfg.experiment.tolerance,
                                  opt, &stats);
  } catch (const DegenerateWave& ex) {
    b.kv.set("result", "nonexistent (DegenerateWave)");
    b.kv.set("reason", ex.what());
    add_probe_artifacts(b, cfg, stats);
    return b;
  } catch (const ParamsInfeasible& ex) {
    b.kv.set("result", "nonexistent (ParamsInfeasible)");
    b.kv.set("reason", ex.what());
    return b;
  }

  b.kv.set("result", "converged");
  set_wave_stats(b, W);
  b.kv.set_number("max_sandwich_violation", stats.max_sandwich_violation);
  add_artifact(b, cfg.output.csv, wave_csv(W));
  if (!cfg.output.svg.empty()) {
    std::vector<report::Series> series;
    series.push_back(wave_slice(W, "U(0,x)"));
    waves::EnvelopeParams ep;
    ep.x_min = grid.x_min;
    ep.x_max = grid.x_max;
    ep.dx = grid.dx();
    ep.shift = cfg.experiment.shift;
    const auto overlay = [&](waves::EnvelopeKind kind, const char* label) {
      try {
        const waves::EnvelopeRecipe r = waves::build_envelope(kind, e, c, ep);
        series.push_back(fn_series(
            grid, [&r](double x) { return r.evaluator(0.0, x); }, label));
      } catch (const ParamsInfeasible&) {
        // envelope not constructible here; skip the overlay
      }
    };
    overlay(waves::EnvelopeKind::pulse_super, "super-solution");
    overlay(waves::EnvelopeKind::pulse_sub_polynomial, "sub-solution");
    add_artifact(b, cfg.output.svg,
                 report::render_svg(strf("pulse wave, c = %g", c), "x", "U",
                                    series));
  }
  return b;
}

void fit_into(Bundle& b, const dynamics::FrontTrace& trace,
              dynamics::FrontSide side, const config::ExperimentConfig& cfg,
              const char* tag) {
  try {
    dynamics::SpeedFit f;
    if (!std::isnan(cfg.experiment.fit_t1)) {
      const double T = cfg.environment.period;
      f = dynamics::fit_front_speed(trace, cfg.experiment.fit_t1 * T,
                                    cfg.experiment.fit_t2 * T, side);
    } else {
      f = dynamics::fit_front_speed(trace, side);
    }
    b.kv.set_fixed(strf("c_hat_%s", tag), f.c_hat);
    b.kv.set_number(strf("gamma_hat_%s", tag), f.gamma_hat);
    b.kv.set_number(strf("rms_%s", tag), f.rms);
    b.kv.set_number(strf("n_used_%s", tag), static_cast<double>(f.n_used));
    b.kv.set_number(strf("fit_t1_%s", tag), f.t1);
    b.kv.set_number(strf("fit_t2_%s", tag), f.t2);
  } catch (const std::exception& ex) {
    b.kv.set(strf("fit_%s", tag), "unavailable (" + describe(ex) + ")");
  }
}

Bundle run_ivp(const config::ExperimentConfig& cfg) {
  Bundle b;
  const env::PeriodicEnvironment e = env::build_environment(cfg.environment);
  const waves::SpeedData sd = waves::compute_speed_data(e);
  const pde::Grid1D grid = grid_of(cfg);
  const pde::StepperConfig scfg = stepper_of(cfg);
  const double c = cfg.experiment.c;
  const dynamics::InitialData init = initial_of(cfg.experiment);

  b.kv.set("experiment", "ivp");
  b.kv.set("environment", e.label);
  b.kv.set_number("period", e.period);
  b.kv.set_number("c", c);
  b.kv.set_fixed("c_star", sd.c_star);
  b.kv.set("init", cfg.experiment.init);
  b.kv.set_number("horizon_periods",
                  static_cast<double>(cfg.time.horizon_periods));

  const dynamics::IvpResult res =
      dynamics::run_ivp(e, c, init, grid, scfg, cfg.time.horizon_periods);
  const dynamics::FrontTrace& tr = res.trace;

  b.kv.set_number("level", tr.level);
  b.kv.set("contaminated", tr.contaminated ? "yes" : "no");
  if (!tr.note.empty()) b.kv.set("note", tr.note);
  b.kv.set_number("sup_final", tr.sup_u.back());
  b.kv.set_number("mass_final", tr.mass.back());
  fit_into(b, tr, dynamics::FrontSide::right, cfg, "right");
  fit_into(b, tr, dynamics::FrontSide::left, cfg, "left");

  if (!cfg.output.csv.empty()) {
    report::Table t({"t", "x_left", "x_right", "sup_u", "mass"});
    for (size_t k = 0; k < tr.size(); ++k)
      t.add_numbers({tr.t[k], tr.x_left[k], tr.x_right[k], tr.sup_u[k],
                     tr.mass[k]});
    add_artifact(b, cfg.output.csv, t.str());
  }
  if (!cfg.output.svg.empty()) {
    report::Series right{"x_right(t)", tr.t, tr.x_right};
    report::Series left{"x_left(t)", tr.t, tr.x_left};
    add_artifact(b, cfg.output.svg,
                 report::render_svg(strf("front positions, c = %g", c), "t",
                                    "x", {left, right}));
  }
  return b;
}

Bundle run_attraction(const config::ExperimentConfig& cfg) {
  Bundle b;
  const env::PeriodicEnvironment e = env::build_environment(cfg.environment);
  const waves::SpeedData sd = waves::compute_speed_data(e);
  const pde::Grid1D grid = grid_of(cfg);
  const pde::StepperConfig scfg = stepper_of(cfg);
  const double c = cfg.experiment.c;
  const dynamics::InitialData init = initial_of(cfg.experiment);

  b.kv.set("experiment", "attraction");
  b.kv.set("environment", e.label);
  b.kv.set_number("period", e.period);
  b.kv.set_number("c", c);
  b.kv.set_fixed("c_star", sd.c_star);
  b.kv.set("init", cfg.experiment.init);
  b.kv.set_number("horizon_periods",
                  static_cast<double>(cfg.time.horizon_periods));

  waves::KppOptions opt;
  opt.max_periods = cfg.experiment.max_periods;
  waves::WaveProfile W;
  try {
    W = waves::compute_kpp_wave(e, c, grid, scfg, cfg.experiment.tolerance,
                                opt);
  } catch (const DegenerateWave& ex) {
    b.kv.set("result", "nonexistent (DegenerateWave)");
    b.kv.set("reason", ex.what());
    return b;
  }
  b.kv.set_number("wave_residual", W.residual);

  const dynamics::AttractionReport rep = dynamics::wave_attraction_error(
      e, c, init, W, grid, scfg,
      static_cast<double>(cfg.time.horizon_periods) * e.period);

  b.kv.set("result", "measured");
  b.kv.set_number("mu", rep.mu);
  b.kv.set_number("err_initial", rep.err.front());
  b.kv.set_number("err_final", rep.err.back());
  b.kv.set("rate_fitted", rep.rate_fitted ? "yes" : "no");
  if (rep.rate_fitted) {
    b.kv.set_number("sigma_hat", rep.sigma_hat);
    b.kv.set_number("log_rms", rep.log_rms);
  }

  if (!cfg.output.csv.empty()) {
    report::Table t({"t", "err"});
    for (size_t k = 0; k < rep.t.size(); ++k)
      t.add_numbers({rep.t[k], rep.err[k]});
    add_artifact(b, cfg.output.csv, t.str());
  }
  if (!cfg.output.svg.empty()) {
    report::Series s{"sup error", rep.t, rep.err};
    add_artifact(b, cfg.output.svg,
                 report::render_svg(strf("attraction to the front, c = %g", c),
                                    "t", "sup |u - U|", {s}));
  }
  return b;
}

epi::EpidemicParams epidemic_params(const env::EnvironmentParams& ep) {
  const double T = ep.period;
  epi::EpidemicParams p;
  p.period = T;
  p.l = ep.l;
  p.B = [ep, T](double t, double) {
    return ep.birth0 + ep.birth_amp * std::sin(2.0 * num::pi * t / T +
                                               ep.birth_phase);
  };
  p.mu = [ep](double, double N) { return ep.mu0 + ep.mu1 * N; };
  p.omega_tilde = [ep, T](double t) {
    return ep.omega0 + ep.omega_amp * std::sin(2.0 * num::pi * t / T +
                                               ep.omega_phase);
  };
  p.gamma = [ep, T](double t) {
    return ep.gamma0 + ep.gamma_amp * std::sin(2.0 * num::pi * t / T +
                                               ep.gamma_phase);
  };
  return p;
}

double orbit_mean(const pode::PeriodicOrbit& o) {
  return num::mean_over_period([&o](double t) { return o.value_at(t); },
                               o.period);
}

Bundle run_epidemic(const config::ExperimentConfig& cfg) {
  Bundle b;
  const epi::EpidemicParams p = epidemic_params(cfg.environment);
  const pde::Grid1D grid = grid_of(cfg);
  const pde::StepperConfig scfg = stepper_of(cfg);
  const double c = cfg.experiment.c;

  b.kv.set("experiment", "epidemic");
  b.kv.set_number("period", p.period);
  b.kv.set_number("l", p.l);
  b.kv.set_number("c", c);

  const epi::EpidemicDerived d = epi::derive_epidemic(p);
  const epi::TransmissionThresholds th = epi::transmission_thresholds(p);

  b.kv.set_number("n_star_min", d.n_star.min_value());
  b.kv.set_number("n_star_max", d.n_star.max_value());
  b.kv.set_number("n_star_mean", orbit_mean(d.n_star));
  b.kv.set_fixed("c_n", d.c_n);
  b.kv.set_fixed("a_bar", d.a_bar);
  b.kv.set_fixed("l_star", th.l_star);
  b.kv.set_fixed("l_upper", th.l_upper);
  b.kv.set_number("gain", th.gain);
  b.kv.set_number("loss", th.loss);
  b.kv.set("has_wave_interval", d.has_wave_interval ? "yes" : "no");
  if (d.has_wave_interval) {
    b.kv.set_fixed("c_lo", d.c_lo);
    b.kv.set_fixed("c_hi", d.c_hi);
  }
  if (d.i_star) {
    b.kv.set_number("i_star_min", d.i_star->min_value());
    b.kv.set_number("i_star_max", d.i_star->max_value());
    b.kv.set_number("i_star_mean", orbit_mean(*d.i_star));
  }

  // a_bar is affine in the transmission scale; table it across [0, 2 l^*].
  if (!cfg.output.csv.empty()) {
    report::Table t({"l", "a_bar"});
    const double l_hi = 2.0 * std::max(th.l_upper, 1e-3);
    for (int k = 0; k <= 32; ++k) {
      const double l = l_hi * k / 32.0;
      t.add_numbers({l, th.gain * l - th.loss});
    }
    add_artifact(b, with_suffix(cfg.output.csv, "_abar_l"), t.str());
  }

  const waves::WaveProfile N = epi::compute_n_wave(
      p, d, c, grid, scfg, cfg.experiment.max_periods);
  b.kv.set_number("n_wave_residual", N.residual);
  b.kv.set_number("n_wave_periods", static_cast<double>(N.periods));
  b.kv.set_number("n_wave_left_dev", N.left_dev);

  std::vector<report::Series> series;
  series.push_back(wave_slice(N, "N(0,x)"));

  bool have_i_wave = false;
  waves::WaveProfile I;
  if (d.i_star) {
    const env::PeriodicEnvironment eI = epi::epidemic_environment(p, d, N);
    waves::KppOptions opt;
    opt.max_periods = cfg.experiment.max_periods;
    try {
      I = waves::compute_kpp_wave(eI, c, grid, scfg, cfg.experiment.tolerance,
                                  opt);
      have_i_wave = true;
    } catch (const DegenerateWave& ex) {
      b.kv.set("result", "nonexistent (DegenerateWave)");
      b.kv.set("reason", ex.what());
    }
  } else {
    b.kv.set("result", "nonexistent (subcritical transmission, a_bar <= 0)");
  }

  if (have_i_wave) {
    b.kv.set("result", "converged");
    set_wave_stats(b, I);
    b.kv.set("csv_contents", "i_wave");
    add_artifact(b, cfg.output.csv, wave_csv(I));
    series.push_back(wave_slice(I, "I(0,x)"));
  } else {
    b.kv.set("csv_contents", "n_wave");
    add_artifact(b, cfg.output.csv, wave_csv(N));
  }

  if (!cfg.output.svg.empty()) {
    const double n0 = d.n_star.value_at(0.0);
    series.push_back(fn_series(grid, [n0](double) { return n0; }, "N*(0)"));
    if (d.i_star) {
      const double i0 = d.i_star->value_at(0.0);
      series.push_back(fn_series(grid, [i0](double) { return i0; }, "I*(0)"));
    }
    add_artifact(b, cfg.output.svg,
                 report::render_svg(strf("epidemic fronts, c = %g", c), "x",
                                    "density", series));
  }
  return b;
}

Bundle run_period_limits(const config::ExperimentConfig& cfg) {
  Bundle b;
  const epi::EpidemicParams p = epidemic_params(cfg.environment);
  std::vector<double> T_values = cfg.experiment.periods;
  if (T_values.empty()) T_values = {0.01, 0.1, 1.0, 10.0, 100.0};

  b.kv.set("experiment", "period_limits");
  b.kv.set_number("n_periods", static_cast<double>(T_values.size()));

  const epi::PeriodLimitsReport rep = epi::period_limits(p, T_values);

  b.kv.set_fixed("v0", rep.v0);
  b.kv.set_fixed("a_bar_0", rep.a_bar_0);
  b.kv.set_fixed("a_bar_inf", rep.a_bar_inf);
  b.kv.set_number("v_inf_min", rep.v_inf.min_value());
  b.kv.set_number("v_inf_max", rep.v_inf.max_value());
  for (size_t i = 0; i < T_values.size(); ++i) {
    const std::string tok = value_token(T_values[i]);
    b.kv.set_number("a_bar_T_" + tok, rep.a_bar[i]);
    double dev0 = 0.0, devInf = 0.0;
    for (int j = 0; j <= 64; ++j) {
      const double s = j / 64.0;
      const double v = rep.v[i].value_at(s);
      dev0 = std::max(dev0, std::fabs(v - rep.v0));
      devInf = std::max(devInf, std::fabs(v - rep.v_inf.value_at(s)));
    }
    b.kv.set_number("dev_v0_T_" + tok, dev0);
    b.kv.set_number("dev_vinf_T_" + tok, devInf);
  }

  if (!cfg.output.csv.empty()) {
    std::vector<std::string> cols = {"s", "v0", "v_inf"};
    for (const double T : T_values) cols.push_back("T=" + value_token(T));
    report::Table t(cols);
    for (int j = 0; j <= 128; ++j) {
      const double s = j / 128.0;
      std::vector<double> row = {s, rep.v0, rep.v_inf.value_at(s)};
      for (const auto& orbit : rep.v) row.push_back(orbit.value_at(s));
      t.add_numbers(row);
    }
    add_artifact(b, cfg.output.csv, t.str());

    report::Table ta({"T", "a_bar"});
    for (size_t i = 0; i < T_values.size(); ++i)
      ta.add_numbers({T_values[i], rep.a_bar[i]});
    add_artifact(b, with_suffix(cfg.output.csv, "_abar"), ta.str());
  }

  if (!cfg.output.svg.empty()) {
    std::vector<report::Series> series;
    report::Series s0{"v0 (T -> 0)", {0.0, 1.0}, {rep.v0, rep.v0}};
    series.push_back(s0);
    report::Series si;
    si.label = "v_inf (T -> inf)";
    for (int j = 0; j <= 128; ++j) {
      si.x.push_back(j / 128.0);
      si.y.push_back(rep.v_inf.value_at(j / 128.0));
    }
    series.push_back(si);
    const size_t shown = std::min<size_t>(T_values.size(), 6);
    for (size_t i = 0; i < shown; ++i) {
      report::Series sv;
      sv.label = "T=" + value_token(T_values[i]);
      for (int j = 0; j <= 128; ++j) {
        sv.x.push_back(j / 128.0);
        sv.y.push_back(rep.v[i].value_at(j / 128.0));
      }
      series.push_back(sv);
    }
    add_artifact(b, cfg.output.svg,
                 report::render_svg("endemic orbits across forcing periods",
                                    "s = t/T", "v", series));
  }
  return b;
}

Bundle dispatch(const config::ExperimentConfig& cfg);

Bundle run_sweep(const config::ExperimentConfig& cfg) {
  Bundle b;
  const config::SweepSection& sw = cfg.sweep;
  const size_t jobs = sw.values.size();
  const int workers = worker_count(jobs);

  b.kv.set("experiment", "sweep");
  b.kv.set("parameter", sw.parameter);
  b.kv.set("sub_experiment", config::kind_name(sw.experiment));
  b.kv.set_number("n_values", static_cast<double>(jobs));
  b.kv.set_number("workers", workers);

  // Immutable per-value configs, prepared up front.
  std::vector<config::ExperimentConfig> subs;
  subs.reserve(jobs);
  for (const double v : sw.values) {
    config::ExperimentConfig sub = cfg;
    sub.experiment.kind = sw.experiment;
    sub.experiment.kind_set = true;
    sub.experiment.c = v;
    sub.sweep = config::SweepSection{};
    const std::string suffix = "_" + sw.parameter + "=" + value_token(v);
    if (!sub.output.csv.empty())
      sub.output.csv = with_suffix(cfg.output.csv, suffix);
    if (!sub.output.svg.empty())
      sub.output.svg = with_suffix(cfg.output.svg, suffix);
    sub.output.report.clear();  // sub-reports land in the master report
    subs.push_back(std::move(sub));
  }

  struct Slot {
    Bundle bundle;
    bool failed = false;
    std::string error;
  };
  std::vector<Slot> slots(jobs);
  std::atomic<size_t> next{0};

  const auto work = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        slots[i].bundle = dispatch(subs[i]);
      } catch (const std::exception& ex) {
        slots[i].failed = true;
        slots[i].error = describe(ex);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  // Stitch results in config order; the coordinator is the only writer.
  size_t failures = 0;
  for (size_t i = 0; i < jobs; ++i) {
    b.extra += "--- " + sw.parameter + "=" + value_token(sw.values[i]) +
               " ---\n";
    if (slots[i].failed) {
      ++failures;
      b.extra += "error=" + slots[i].error + "\n";
      continue;
    }
    b.extra += slots[i].bundle.kv.str() + slots[i].bundle.extra;
    for (auto& a : slots[i].bundle.artifacts)
      b.artifacts.push_back(std::move(a));
  }
  b.kv.set("status", failures == 0 ? "ok"
                                   : strf("%zu of %zu values failed", failures,
                                          jobs));
  if (failures > 0) {
    b.exit_code = 1;
    for (const auto& s : slots)
      if (s.failed) {
        b.error = s.error;
        break;
      }
  }
  return b;
}

Bundle dispatch(const config::ExperimentConfig& cfg) {
  using config::ExperimentKind;
  if (cfg.experiment.kind == ExperimentKind::sweep) return run_sweep(cfg);
  Bundle b;
  switch (cfg.experiment.kind) {
    case ExperimentKind::cstar: b = run_cstar(cfg); break;
    case ExperimentKind::kpp_wave: b = run_kpp_wave(cfg); break;
    case ExperimentKind::pulse_wave: b = run_pulse_wave(cfg); break;
    case ExperimentKind::ivp: b = run_ivp(cfg); break;
    case ExperimentKind::attraction: b = run_attraction(cfg); break;
    case ExperimentKind::epidemic: b = run_epidemic(cfg); break;
    case ExperimentKind::period_limits: b = run_period_limits(cfg); break;
    case ExperimentKind::sweep: break;  // handled above
  }
  apply_checks(b, cfg.experiment);
  return b;
}

}  // namespace

int worker_count(size_t jobs) {
  long w = 0;
  if (const char* s = std::getenv("RDSHIFT_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v >= 1) w = v;
  }
  if (w <= 0) w = static_cast<long>(std::thread::hardware_concurrency());
  if (w <= 0) w = 2;
  w = std::min<long>(w, static_cast<long>(std::max<size_t>(jobs, 1)));
  return static_cast<int>(std::min<long>(w, 64));
}

std::vector<std::string> experiment_kind_names() {
  return config::all_kind_names();
}

std::vector<std::string> environment_kind_names() {
  return {"tanh_fisher", "piecewise_fisher", "sis_derived"};
}

std::vector<std::string> initial_data_names() {
  return {"bump", "exp_tail", "front", "constant"};
}

RunOutcome run_experiment(const config::ExperimentConfig& cfg) {
  RunOutcome out;
  Bundle b;
  try {
    cfg.validate();
    cfg.validate_paths();
    b = dispatch(cfg);
  } catch (const std::exception& ex) {
    out.exit_code = 1;
    out.error = describe(ex);
    return out;
  }

  std::vector<std::string> written;
  try {
    for (const auto& a : b.artifacts) {
      report::write_text_file(a.path, a.content);
      written.push_back(a.path);
    }
    out.report_text = b.kv.str() + b.extra;
    if (!cfg.output.report.empty())
      report::write_text_file(cfg.output.report, out.report_text);
  } catch (const std::exception& ex) {
    for (const auto& w : written) report::remove_file(w);
    if (!cfg.output.report.empty()) report::remove_file(cfg.output.report);
    out = RunOutcome{};
    out.exit_code = 1;
    out.error = describe(ex);
    return out;
  }

  out.artifacts = std::move(b.artifacts);
  out.exit_code = b.exit_code;
  out.error = b.error;
  return out;
}

}  // namespace rdshift::experiments
