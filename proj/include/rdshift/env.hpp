#pragma once

#include <functional>
#include <optional>
#include <string>

namespace rdshift::env {

/// Algebraic decay certificate for the approach to the left limit:
/// sup_t |g(t, xi, 0) - g(t, -inf, 0)| = o(|xi|^{-(r0+m)}) as xi -> -inf.
/// Exponential-tail kinds satisfy every such envelope; they ship with m = 2
/// (which implies the m = 1 variant).
struct DecayMeta {
  double r0 = 1.0;
  int m = 2;
};

enum class Kind { tanh_fisher, piecewise_fisher, sis_derived };

std::string kind_name(Kind k);
Kind kind_from_name(const std::string& name);

/// Parameters for the shipped environment families. All kinds share the
/// seasonal forcing amp/phase (applied to the favorable-side coefficient;
/// phases reduce mod 2*pi exactly, so t-periodicity is bitwise).
struct EnvironmentParams {
  Kind kind = Kind::tanh_fisher;
  double period = 1.0;

  // tanh_fisher / piecewise_fisher: growth offsets on the two sides of the
  // interface, interface width, seasonal forcing of the favorable side.
  double r_offset = 1.0;
  double s_offset = -1.0;
  double ell = 1.0;
  double seasonal_amp = 0.0;
  double seasonal_phase = 0.0;
  double tail_power = 4.0;  // piecewise_fisher algebraic tail exponent

  std::optional<DecayMeta> decay;  // default filled per kind

  // sis_derived: infection equation around the endemic orbit of
  // N' = N (B(t) - mu(t,N)), with a tanh interface of width ell.
  //   B(t)     = birth0 + birth_amp  * sin(2 pi t/T + birth_phase)
  //   mu(t,N)  = mu0 + mu1 * N
  //   omega(t) = l * (omega0 + omega_amp * sin(2 pi t/T + omega_phase))
  //   gamma(t) = gamma0 + gamma_amp * sin(2 pi t/T + gamma_phase)
  double birth0 = 1.0, birth_amp = 0.0, birth_phase = 0.0;
  double mu0 = 0.0, mu1 = 1.0;
  double l = 1.0, omega0 = 5.0, omega_amp = 0.0, omega_phase = 0.0;
  double gamma0 = 1.0, gamma_amp = 0.0, gamma_phase = 0.0;
};

/// A T-periodic reaction environment g(t, xi, u) for
///   u_t = u_xx + u g(t, x - c t, u),
/// non-increasing in xi and in u, with spatial limits g(t, +-inf, u).
/// eval() clamps |xi| beyond limit_cutoff to the limit values and clamps u to
/// [0, 10*m_cap] before calling g; m_cap bounds the orbit of the homogeneous
/// left-limit ODE. When the u-dependence is affine, base/slope expose
/// g = base(t, xi) - slope(t) * u so the stepper can cache coefficient rows.
struct PeriodicEnvironment {
  double period = 1.0;
  double limit_cutoff = 40.0;
  double m_cap = 1.0;
  /// Accuracy of the cutoff clamp: |g(t, +-cutoff, u) - limit| stays below
  /// this. Closed-form kinds achieve ~1e-12; profile-backed environments
  /// record the accuracy their data supports.
  double limit_tol = 1e-12;
  std::optional<DecayMeta> decay;
  std::string label = "custom";

  std::function<double(double, double, double)> g;       // (t, xi, u), raw
  std::function<double(double, double)> limit_left;      // (t, u)
  std::function<double(double, double)> limit_right;     // (t, u)
  std::function<double(double, double)> base;            // affine only
  std::function<double(double)> slope;                   // affine only

  bool affine() const { return static_cast<bool>(base); }

  double u_clamp_cap() const { return 10.0 * m_cap; }

  /// Clamped evaluation used by the stepper.
  double eval(double t, double xi, double u) const;

  /// Affine extension without the u-floor; needed by residual checks whose
  /// comparison functions dip slightly below zero. Falls back to eval for
  /// non-affine environments.
  double eval_extended(double t, double xi, double u) const;

  /// base with the same xi-clamp as eval (affine kinds only).
  double eval_base(double t, double xi) const;
};

PeriodicEnvironment build_environment(const EnvironmentParams& p);

/// Sample grid for assumption checks. xi samples combine a linear band
/// across the interface with log-spaced points toward the cutoff; u spans
/// [0, u_max] (u_max < 0 means the environment's m_cap).
struct SamplingPlan {
  int n_t = 32;
  int n_xi = 33;
  int n_u = 8;
  double u_max = -1.0;
  int n_c4 = 24;  // log-spaced xi -> -cutoff samples for the decay check
};

struct CheckResult {
  bool pass = true;
  double worst = 0.0;      // worst signed violation (check-specific scale)
  double at_t = 0, at_xi = 0, at_u = 0;
  std::string note;
};

struct ValidationReport {
  CheckResult periodicity;       // g(t+T,.) == g(t,.) at machine precision
  CheckResult monotone_xi;       // non-increasing in xi
  CheckResult monotone_u;        // non-increasing in u
  CheckResult left_mean;         // (1/T) int g(t,-inf,0) dt > 0
  CheckResult cap_nonpositive;   // g(t,-inf,m_cap) <= 0 for all t
  CheckResult right_mean;        // (1/T) int g(t,+inf,0) dt < 0
  CheckResult limit_consistency; // g near +-cutoff matches the stored limits
  std::optional<CheckResult> decay_c4;  // only when decay metadata present
  double c4_slope = 0.0;         // fitted log-log slope of the decay product

  bool pass() const;
  std::string summary() const;   // one line per check
};

ValidationReport validate_assumptions(const PeriodicEnvironment& e,
                                      const SamplingPlan& plan = {});

}  // namespace rdshift::env
