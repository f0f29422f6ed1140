#pragma once

#include <string>
#include <vector>

#include "rdshift/env.hpp"
#include "rdshift/pde.hpp"
#include "rdshift/waves.hpp"

namespace rdshift::dynamics {

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

/// Starting data for lab-frame runs: nonnegative, bounded, not identically
/// zero. Factory methods cover the shapes the experiments need; operator()
/// is what run_ivp samples onto its grid.
struct InitialData {
  enum class Kind { compact_bump, exp_tail, front_like, constant };

  Kind kind = Kind::compact_bump;
  double height = 1.0;  ///< amplitude (front_like: the left plateau level)
  double center = 0.0;  ///< bump center / tail peak / front interface
  double width = 1.0;   ///< bump half-width (compact_bump only)
  double rate = 2.0;    ///< exp_tail two-sided decay rate lambda_0

  /// Top hat of the given height on [center - half_width, center + half_width].
  static InitialData bump(double height = 1.0, double center = 0.0,
                          double half_width = 1.0);
  /// Two-sided exponential peak height * exp(-rate |x - peak|).
  static InitialData exp_tail(double rate, double height = 1.0,
                              double peak = 0.0);
  /// Smooth interface level * (1 - tanh(x - interface_at)) / 2.
  static InitialData front(double level, double interface_at = 0.0);
  static InitialData constant(double value);

  double operator()(double x) const;

  /// Positivity of the defining parameters; throws InvalidArgument.
  void validate() const;
};

/// integral of e^{-rate x} u0(x) dx: trapezoid over the grid plus closed-form
/// bounds for the mass outside it. finite == false flags divergence (the
/// integrand grows without bound in some direction); value then holds the
/// grid part only.
struct TailIntegral {
  double value = 0.0;
  double tail_bound = 0.0;  ///< analytic bound on the off-grid remainder
  bool finite = true;
};

TailIntegral tail_integral(const InitialData& init, double rate,
                           const pde::Grid1D& grid);

// ---------------------------------------------------------------------------
// Lab-frame initial-value runs
// ---------------------------------------------------------------------------

/// Level-crossing record of a run, sampled once per period. Crossings are
/// located by linear interpolation between grid nodes; when u stays below
/// the level everywhere, x_right carries -inf and x_left +inf.
struct FrontTrace {
  double level = 0.0;  ///< crossing density, alpha_min / 2 by default
  double period = 1.0;
  std::vector<double> t;        ///< exact period multiples
  std::vector<double> x_left;   ///< leftmost crossing of the level
  std::vector<double> x_right;  ///< rightmost crossing of the level
  std::vector<double> sup_u;
  std::vector<double> mass;     ///< trapezoid integral of u over the grid
  bool contaminated = false;    ///< a front entered the 10% boundary margin
  std::string note;

  size_t size() const { return t.size(); }
};

struct IvpResult {
  pde::Field final;  ///< state at t = horizon_periods * T
  FrontTrace trace;
};

/// Evolves u_t = u_xx + u g(t, x - ct, u) in the lab frame from the given
/// data under zero-flux ends, recording the trace at every period multiple
/// (including t = 0). A front reaching the 10% boundary margin sets the
/// contaminated flag; it does not abort the run.
IvpResult run_ivp(const env::PeriodicEnvironment& e, double c,
                  const InitialData& init, const pde::Grid1D& grid,
                  const pde::StepperConfig& cfg, long horizon_periods);

// ---------------------------------------------------------------------------
// Front-speed fitting
// ---------------------------------------------------------------------------

enum class FrontSide { left, right };

/// Least-squares fit of X(t) = c_hat t - gamma_hat ln t + b over a trace
/// window. The left front is mirrored (the fit sees -X_left), so c_hat
/// reports the outward speed on either side.
struct SpeedFit {
  double c_hat = 0.0;
  double gamma_hat = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
  double t1 = 0.0, t2 = 0.0;
  long n_used = 0;
};

/// Window form; needs t2 > t1 >= 10 periods and at least 20 finite samples
/// inside (InsufficientData otherwise).
SpeedFit fit_front_speed(const FrontTrace& trace, double t1, double t2,
                         FrontSide side = FrontSide::right);

/// Default window [t_end / 3, t_end]: the Bramson-type correction needs the
/// transient discarded.
SpeedFit fit_front_speed(const FrontTrace& trace,
                         FrontSide side = FrontSide::right);

// ---------------------------------------------------------------------------
// Attraction to the forced wave
// ---------------------------------------------------------------------------

/// Per-period distance to the forced wave over the expanding half-line
/// x >= -mu t with mu = c*/2; the profile is extended by its boundary
/// targets (alpha left, 0 right) outside its own grid.
struct AttractionReport {
  std::vector<double> t;    ///< period multiples
  std::vector<double> err;  ///< sup_{x >= -mu t} |u(t,x) - U(t, x - ct)|
  double mu = 0.0;
  bool rate_fitted = false;  ///< front-like data over strictly negative g_u
  double sigma_hat = 0.0;    ///< decay rate: log err ~ -sigma_hat t + const
  double log_rms = 0.0;      ///< rms of that log-linear fit
};

/// Runs the lab-frame problem and measures convergence to U. The horizon is
/// a time and must be a whole number of periods (PhaseMismatch otherwise);
/// U must be a kpp profile computed for the same speed and period. When the
/// data is front_like and the sampled g_u stays strictly negative, the decay
/// rate of the error is fitted on the trailing two thirds of the series.
AttractionReport wave_attraction_error(const env::PeriodicEnvironment& e,
                                       double c, const InitialData& init,
                                       const waves::WaveProfile& U,
                                       const pde::Grid1D& grid,
                                       const pde::StepperConfig& cfg,
                                       double horizon);

}  // namespace rdshift::dynamics
