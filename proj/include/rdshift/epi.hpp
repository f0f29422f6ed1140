#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rdshift/env.hpp"
#include "rdshift/pde.hpp"
#include "rdshift/pode.hpp"
#include "rdshift/waves.hpp"

namespace rdshift::epi {

// ---------------------------------------------------------------------------
// Parameters and derived quantities
// ---------------------------------------------------------------------------

/// Seasonal SIS coefficients. B (birth) and mu (death) take (t, N);
/// omega_tilde (transmission shape) and gamma (recovery) take t. The
/// effective transmission is omega(t) = l * omega_tilde(t), so the scale l
/// can be swept without touching the shape.
struct EpidemicParams {
  std::function<double(double, double)> B;
  std::function<double(double, double)> mu;
  std::function<double(double)> omega_tilde;
  std::function<double(double)> gamma;
  double l = 1.0;
  double period = 1.0;
  double n_upper = 0.0;  ///< M with B(t,M) <= mu(t,M); 0 = search by doubling

  double omega(double t) const { return l * omega_tilde(t); }

  /// Sampled structural checks: B - mu strictly decreasing in N, positive
  /// mean growth at N = 0, and some ceiling M with B(t,M) - mu(t,M) <= 0.
  /// Returns the ceiling; throws AssumptionViolation / InvalidArgument.
  double validate() const;
};

/// Output of the scalar reductions: the endemic total-population orbit, the
/// minimal N-wave speed, the infection growth rate A and its mean, the
/// endemic infection orbit when it exists, and the forced-wave speed band.
struct EpidemicDerived {
  double period = 1.0;
  pode::PeriodicOrbit n_star;
  double c_n = 0.0;
  std::function<double(double)> a;  ///< A(t) = omega N* - mu(., N*) - gamma
  double a_bar = 0.0;
  std::optional<pode::PeriodicOrbit> i_star;  ///< present iff a_bar > 0
  bool has_wave_interval = false;  ///< a_bar > c_n^2 / 4
  double c_lo = 0.0;               ///< = c_n when the interval is nonempty
  double c_hi = 0.0;               ///< = 2 sqrt(a_bar)
};

EpidemicDerived derive_epidemic(const EpidemicParams& params);

// ---------------------------------------------------------------------------
// Transmission thresholds
// ---------------------------------------------------------------------------

/// a_bar is affine in the transmission scale: a_bar(l) = l*gain - loss with
/// gain = mean(omega_tilde N*) and loss = mean(mu(., N*) + gamma). l_star is
/// the root of a_bar = 0 (endemic orbit appears), l_upper the root of
/// a_bar = c_n^2/4 (the forced-wave interval opens).
struct TransmissionThresholds {
  double l_star = 0.0;
  double l_upper = 0.0;
  double gain = 0.0;
  double loss = 0.0;
};

TransmissionThresholds transmission_thresholds(const EpidemicParams& params);

// ---------------------------------------------------------------------------
// Period limits
// ---------------------------------------------------------------------------

/// Tables for the normalized equation dv/ds = T v [B(s,v) - mu(s,v)] on
/// s in [0,1]: the orbit v_T for each requested T, the T -> 0 limit v0
/// (root of the s-averaged growth), the T -> infinity limit v_inf(s)
/// (pointwise root), and the corresponding a_bar values.
struct PeriodLimitsReport {
  std::vector<double> T_values;
  std::vector<pode::PeriodicOrbit> v;
  double v0 = 0.0;
  pode::PeriodicOrbit v_inf;
  std::vector<double> a_bar;
  double a_bar_0 = 0.0;
  double a_bar_inf = 0.0;
};

/// params must be in normalized form (period == 1, coefficients 1-periodic
/// in s). Throws RootBracketFailure when a root bracket cannot be set up.
PeriodLimitsReport period_limits(const EpidemicParams& params,
                                 const std::vector<double>& T_values);

// ---------------------------------------------------------------------------
// The N wave and the infection habitat
// ---------------------------------------------------------------------------

/// Traveling front of N_t = N_xx + N [B(t,N) - mu(t,N)] at speed c >= c_N.
/// The homogeneous equation has free phase, so the front is computed in the
/// frame moving at c with both ends pinned: the left node is clamped to the
/// stepper's own discrete carrying state, the right node to the exponential
/// tail ansatz with the speed-selecting rate
/// lambda(c) = (c - sqrt(c^2 - c_N^2)) / 2 (a pulled front starves and
/// retreats when an absorbing wall truncates its tail). The period map is
/// iterated from front-like data until the per-period change drops below
/// 1e-10 (NonConvergence if it is still above 1e-6 at the cap; speeds very
/// close to c_N converge slowly since the pure-exponential ansatz degrades
/// at the double root). Returned as a kpp-kind WaveProfile on xi_grid
/// (alpha = N*); slices are projected to be non-increasing when the raw
/// violation is below 1e-8 and rejected with MonotonicityViolation
/// otherwise.
waves::WaveProfile compute_n_wave(const EpidemicParams& params,
                                  const EpidemicDerived& derived, double c,
                                  const pde::Grid1D& xi_grid,
                                  const pde::StepperConfig& cfg,
                                  long settle_periods = 200);

/// The infection equation's habitat along the computed N profile:
/// g(t, xi, I) = omega(t) N(t,xi) - mu(t, N(t,xi)) - gamma(t) - omega(t) I,
/// with limits from N -> N*(t) on the left and N -> 0 on the right. Feeds
/// directly into waves::compute_kpp_wave; its g(t,-inf,0) mean equals a_bar,
/// so the existence threshold 2 sqrt(a_bar) matches the derived interval.
env::PeriodicEnvironment epidemic_environment(const EpidemicParams& params,
                                              const EpidemicDerived& derived,
                                              const waves::WaveProfile& n_wave);

}  // namespace rdshift::epi
