#pragma once
// Poincare-map machinery for time-periodic travelling waves: linearized
// speeds, constructive sub/super-solution envelopes, fixed-point iteration
// of the period map for forced KPP fronts and pulse waves, and a
// multiple-starts uniqueness probe.

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rdshift/env.hpp"
#include "rdshift/pde.hpp"
#include "rdshift/pode.hpp"

namespace rdshift::waves {

// ---------------------------------------------------------------------------
// Linearized speed data
// ---------------------------------------------------------------------------

/// Scalars derived from the environment's spatial limits that control wave
/// existence: the homogeneous spreading speed c_star = 2 sqrt(mean of
/// g(t,-inf,0)), the left-tail decay rate lambda_1c of fronts, and the
/// right-tail decay rate mu_c of pulses.
struct SpeedData {
    double c_star = 0.0;        ///< 2 sqrt(g_minus_mean)
    double g_minus_mean = 0.0;  ///< period mean of g(t,-inf,0), must be > 0
    double g_plus_mean = 0.0;   ///< period mean of g(t,+inf,0), must be < 0
    double period = 1.0;

    /// Decay rate of the front tail toward the carrying state: the root of
    /// lambda^2 + c lambda + g_minus_mean = 0 of smaller magnitude.
    /// Requires |c| >= c_star (up to a 1e-9 tolerance); throws
    /// errors::InvalidArgument otherwise.
    double lambda_1c(double c) const;

    /// Decay rate of a pulse's right tail: the negative root of
    /// mu^2 + c mu + g_plus_mean = 0 (always real since g_plus_mean < 0).
    double mu_c(double c) const;

    /// Smallest positive root of mu^2 + c mu + g_minus_mean = 0, the pulse's
    /// left-tail rate; requires c <= -c_star (tolerance 1e-9).
    double mu_1(double c) const;
};

/// Computes SpeedData by adaptive quadrature of the environment's limits over
/// one period (absolute tolerance 1e-12). Throws errors::AssumptionViolation
/// if g_minus_mean <= 0 or g_plus_mean >= 0.
SpeedData compute_speed_data(const env::PeriodicEnvironment& e);

// ---------------------------------------------------------------------------
// Wave profiles
// ---------------------------------------------------------------------------

/// A converged periodic wave profile in the moving frame: 65 evenly spaced
/// time slices across one period (slice 0 and slice 64 are one period apart),
/// each a nodal vector on the grid.
struct WaveProfile {
    enum class Kind { kpp, pulse };

    Kind kind = Kind::kpp;
    pde::Grid1D grid{};
    double c = 0.0;
    double period = 1.0;
    std::vector<double> t_mesh;           ///< 65 slice times, t_mesh[j] = j T / 64
    std::vector<std::vector<double>> U;   ///< U[j][i], slice j, node i
    pode::PeriodicOrbit alpha;            ///< carrying orbit alpha(t) at xi = -inf

    double residual = 0.0;      ///< final per-period sup change of the iteration
    double left_dev = 0.0;      ///< max_j |U[j][0] - target| (alpha or 0 by kind)
    double right_dev = 0.0;     ///< max_j |U[j][n-1]|
    double interior_sup = 0.0;  ///< window sup at convergence (see window_left)
    double mono_violation = 0.0;///< max increase in x across slices (kpp diagnostic)
    double window_left = 0.0;   ///< left edge of the interior diagnostic window
    long periods = 0;           ///< periods iterated before convergence

    /// Value at slice j, cubic in x inside the grid; outside the grid the
    /// kind's extension applies (kpp: alpha(t) left / 0 right; pulse: 0 both).
    double slice_value(int j, double x) const;

    /// Value at arbitrary (t, x): linear interpolation between the two
    /// bracketing slices (t reduced mod period), cubic in x as above.
    double value_at(double t, double x) const;

    /// Largest nodal value over all slices.
    double sup() const;
};

/// Per-period iteration history, filled by the wave solvers (including on
/// throw, so callers can inspect degeneration trajectories).
struct IterationStats {
    std::vector<double> sup_per_period;     ///< interior-window sup after each period
    std::vector<double> change_per_period;  ///< full-grid sup |u_k - u_{k-1}|
    double max_sandwich_violation = 0.0;    ///< pulse runs: worst envelope breach
    double window_left = 0.0;
    long periods = 0;
    bool probe = false;        ///< ran in probe mode (c >= c_star - margin)
    bool converged = false;
};

struct KppOptions {
    double margin = 0.05;      ///< probe mode for c >= c_star - margin
    long max_periods = 2000;
    double start_level = 1.0;  ///< iteration starts from start_level * alpha(0)
};

/// Iterates the period map from the spatially uniform state
/// start_level * alpha(0) under clamp-to-alpha / zero boundaries until the
/// per-period sup change falls below tol. For c < c_star - margin the
/// converged profile is returned (throws errors::DegenerateWave if its
/// interior-window sup is below 10 tol, and errors::NonConvergence at the
/// period cap). For c >= c_star - margin the run is a nonexistence probe:
/// it exits with errors::DegenerateWave as soon as the window sup falls
/// below 10 tol, and errors::NonConvergence at the cap; the stats output
/// records the window-sup trajectory either way.
/// Requires cfg.steps_per_period divisible by 64 (profile slice capture).
WaveProfile compute_kpp_wave(const env::PeriodicEnvironment& e, double c,
                             const pde::Grid1D& grid,
                             const pde::StepperConfig& cfg, double tol,
                             const KppOptions& opt = {},
                             IterationStats* stats = nullptr);

struct PulseOptions {
    long max_periods = 2000;
    double delta_super = 1.0;  ///< amplitude of the exponential super-solution
    double shift = 0.0;        ///< translation applied to both envelopes
};

/// Computes a pulse wave for c <= -c_star by iterating the period map from
/// the pointwise minimum of the exponential super-solution envelope and
/// alpha(0), under zero/zero boundaries. Both envelopes are built and
/// residual-checked first (throws errors::EnvelopeInvalid on a wrong-sign
/// residual, errors::ParamsInfeasible if the speed regime or the
/// environment's decay metadata rules the construction out). The sandwich
/// v_sub <= u_k <= v_super is tracked at every period boundary and reported
/// in stats. Throws errors::NonConvergence at the period cap.
WaveProfile compute_pulse_wave(const env::PeriodicEnvironment& e, double c,
                               const pde::Grid1D& grid,
                               const pde::StepperConfig& cfg, double tol,
                               const PulseOptions& opt = {},
                               IterationStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Envelopes (constructive sub/super-solutions)
// ---------------------------------------------------------------------------

enum class EnvelopeKind {
    super_exponential,     ///< M e^{lambda_1c x} psi(t); blocks fronts, |c| >= c_star
    sub_sine_bump,         ///< compact growing bump, |c| < c_star
    sub_two_exponential,   ///< delta p(t)(e^{mu x} - M e^{(mu+eta)x}), c <= -c_star
    pulse_super,           ///< delta p(t) e^{mu_1 (x+shift)}, c <= -c_star
    pulse_sub_polynomial,  ///< delta p(t) e^{mu_1 x}(|x|^k - M |x|^{k-r}), c <= -c_star
    stability_pair,        ///< squeezing pair (1 +- rho e^{-sigma t})U +- sigma rho e^{-sigma t} p
};

const char* envelope_kind_name(EnvelopeKind k);

/// Optional overrides for build_envelope; NaN fields select the built-in
/// defaults. x_min/x_max/dx bound the mesh used for parameter searches
/// (pulse sub-solution support fitting) and should match the PDE grid.
struct EnvelopeParams {
    double M = std::nan("");
    double delta = std::nan("");
    double epsilon = std::nan("");
    double L = std::nan("");
    double shift = 0.0;
    double delta_hyp = std::nan("");  ///< stability_pair: delta with g_u <= -delta
    double x_min = -200.0;
    double x_max = 200.0;
    double dx = 0.1;
    const WaveProfile* wave = nullptr;  ///< stability_pair: the squeezed wave
};

/// Point values of an envelope and its derivatives, from the recipe's
/// closed forms.
struct EnvelopeValues {
    double v = 0.0, vt = 0.0, vx = 0.0, vxx = 0.0;
};

/// A fully parameterized envelope: closed-form evaluator, analytic
/// derivatives, periodic weight orbits, kink locations, and the scalar
/// parameters the construction chose. For stability_pair the pair (w+, w-)
/// is carried by evaluator / evaluator_minus and the residuals by the
/// reduced-form closures; other kinds leave those empty.
struct EnvelopeRecipe {
    EnvelopeKind kind = EnvelopeKind::super_exponential;
    bool is_super = true;   ///< primary side (stability_pair checks both)
    double c = 0.0;
    double period = 1.0;

    // Scalar parameters, NaN when not applicable to the kind.
    double M = std::nan("");
    double delta = std::nan("");
    double L = std::nan("");
    double lambda = std::nan("");   ///< super_exponential decay / sine-bump growth
    double mu = std::nan("");
    double eta = std::nan("");
    double mu1 = std::nan("");
    double k = std::nan("");
    double r = std::nan("");
    double sigma = std::nan("");
    double rho = std::nan("");
    double epsilon = std::nan("");
    double x_eps = std::nan("");
    double delta_eps = std::nan("");
    double xi0 = std::nan("");  ///< stability_pair blend abscissa
    double shift = 0.0;

    pode::PeriodicOrbit p;    ///< periodic weight orbit (stability_pair: v1)
    pode::PeriodicOrbit psi;  ///< second orbit where used (stability_pair: v0)

    std::vector<double> kinks;  ///< kink abscissae (one-sided slope jumps)

    std::function<double(double, double)> evaluator;        ///< (t, x) -> v
    std::function<EnvelopeValues(double, double)> derivs;   ///< analytic v, vt, vx, vxx
    std::function<double(double, double)> evaluator_minus;  ///< stability_pair w-
    std::function<double(double, double)> resid_plus;       ///< reduced-form residuals
    std::function<double(double, double)> resid_minus;
};

/// Builds an envelope of the given kind for (e, c), choosing any free
/// parameters by the documented defaults (margin scans on a 1/16-step mesh,
/// doubling searches for support fitting). Throws errors::ParamsInfeasible
/// when the kind's strict inequalities cannot be met: wrong speed regime,
/// missing decay metadata, no feasible bump width, empty support on the
/// search mesh, or a missing wave for stability_pair.
EnvelopeRecipe build_envelope(EnvelopeKind kind,
                              const env::PeriodicEnvironment& e, double c,
                              const EnvelopeParams& params = {});

/// One kink's one-sided slope jump, measured by 2nd-order one-sided
/// differences of the evaluator: jump = v_x(x+) - v_x(x-). Sub-solutions
/// need jump >= -tol, super-solutions jump <= +tol.
struct KinkCheck {
    double x = 0.0;
    double jump = 0.0;
    bool ok = true;
};

/// Residual scan of an envelope over grid x t_samples. Residuals are
/// normalized pointwise by max(|v|, floor); a sub-solution needs normalized
/// residual >= -tol everywhere it is positive, a super-solution <= +tol.
struct ResidualReport {
    bool checked_sub = false;
    bool checked_super = false;
    double min_residual = 0.0;       ///< worst raw residual (sub side)
    double max_residual = 0.0;       ///< worst raw residual (super side)
    double min_normalized = 0.0;
    double max_normalized = 0.0;
    double min_at_t = 0.0, min_at_x = 0.0;
    double max_at_t = 0.0, max_at_x = 0.0;
    double tol = 1e-6;
    long n_samples = 0;
    std::vector<KinkCheck> kinks;
    bool sub_ok = true;
    bool super_ok = true;
    bool kinks_ok = true;
    bool used_fd = false;  ///< derivatives came from 4th-order differences

    bool pass() const { return sub_ok && super_ok && kinks_ok; }
    std::string summary() const;
};

/// Scans -v_t + v_xx + c v_x + v g(t, x, v) over all grid nodes and sample
/// times, using the recipe's analytic derivatives when present and 4th-order
/// centered differences of the evaluator otherwise (skipping a 2-step collar
/// around kinks). Kink slope jumps are always measured by one-sided 2nd-order
/// differences. Reports; never throws on a failed check.
ResidualReport check_envelope(const EnvelopeRecipe& recipe,
                              const env::PeriodicEnvironment& e, double c,
                              const pde::Grid1D& grid,
                              const std::vector<double>& t_samples,
                              double tol = 1e-6);

/// Sample times matched to the recipe's validity window: 33 points covering
/// [0, 2T) for the growing sub-solutions, [0, T) otherwise.
std::vector<double> default_t_samples(const EnvelopeRecipe& recipe, int n = 33);

// ---------------------------------------------------------------------------
// Uniqueness probe
// ---------------------------------------------------------------------------

/// Pairwise sup distances between period-map limits from three distinct
/// starts: alpha(0), 3 alpha(0), and the steep step alpha(0) 1_{x<0}.
struct UniquenessReport {
    std::array<double, 3> sup{};      ///< window sup of each converged state
    std::array<long, 3> periods{};
    double d12 = 0.0, d13 = 0.0, d23 = 0.0;
    bool any_degenerate = false;      ///< some start drained to zero

    double max_distance() const { return std::max({d12, d13, d23}); }
};

/// Runs the KPP iteration from the three starts above and reports pairwise
/// full-grid sup distances of the converged states. A start that degenerates
/// (window sup < 10 tol) contributes its drained field and sets
/// any_degenerate. Throws errors::NonConvergence if any start hits the cap.
UniquenessReport verify_uniqueness(const env::PeriodicEnvironment& e, double c,
                                   const pde::Grid1D& grid,
                                   const pde::StepperConfig& cfg, double tol,
                                   long max_periods = 2000);

}  // namespace rdshift::waves
