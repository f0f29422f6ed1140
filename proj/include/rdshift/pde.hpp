#pragma once

#include <functional>
#include <vector>

#include "rdshift/env.hpp"
#include "rdshift/pode.hpp"

namespace rdshift::pde {

/// Uniform 1-D grid with n nodes on [x_min, x_max].
struct Grid1D {
  double x_min = -200.0;
  double x_max = 200.0;
  int n = 4001;

  double dx() const { return (x_max - x_min) / (n - 1); }
  double x(int i) const { return x_min + i * dx(); }
  void validate() const;  // throws InvalidArgument
};

/// Grid snapshot of u(t, .). Values stay finite and >= 0 throughout a run.
struct Field {
  Grid1D grid;
  double t = 0.0;
  std::vector<double> values;
};

Field make_field(const Grid1D& grid, double t,
                 const std::function<double(double)>& f);

enum class BoundaryKind { clamp_to_orbit, zero, neumann_zero };

/// One edge of the domain. clamp_to_orbit pins the node to a positive
/// T-periodic orbit (the finite-domain stand-in for u -> alpha(t));
/// zero pins it to 0; neumann_zero reflects (u_x = 0, advection dropped).
struct BoundarySide {
  BoundaryKind kind = BoundaryKind::zero;
  pode::PeriodicOrbit orbit;  // clamp_to_orbit only

  static BoundarySide zero() { return {BoundaryKind::zero, {}}; }
  static BoundarySide neumann_zero() { return {BoundaryKind::neumann_zero, {}}; }
  static BoundarySide clamp(pode::PeriodicOrbit o) {
    return {BoundaryKind::clamp_to_orbit, std::move(o)};
  }
};

struct BoundaryPolicy {
  BoundarySide left = BoundarySide::zero();
  BoundarySide right = BoundarySide::zero();
};

/// lab:    u_t = u_xx + u g(t, x - c t, u)        (no advection term)
/// moving: U_t = U_xx + c U_x + U g(t, x, U)
struct Frame {
  enum class Kind { lab, moving };
  Kind kind = Kind::moving;
  double c = 0.0;

  static Frame lab(double c) { return {Kind::lab, c}; }
  static Frame moving(double c) { return {Kind::moving, c}; }
  double advection() const { return kind == Kind::moving ? c : 0.0; }
};

enum class Scheme { imex_cn, strang };

/// Either give dt directly (T/dt must be an integer within 1e-12) or leave
/// dt = 0 and give steps_per_period.
struct StepperConfig {
  double dt = 0.0;
  int steps_per_period = 512;
  Scheme scheme = Scheme::imex_cn;
  bool check_finite = true;
};

/// A stepping session: owns its field, prefactored tridiagonal solve, and a
/// lazy per-phase table of reaction coefficient rows. Keying the table by
/// step phase makes the discrete period map exactly periodic, which is what
/// the fixed-point iterations in the waves module converge against.
/// Sessions share no mutable state; run them concurrently at will.
class Stepper {
 public:
  Stepper(env::PeriodicEnvironment e, Frame frame, BoundaryPolicy bc,
          StepperConfig cfg, Field initial);

  void advance(long steps);
  void advance_periods(long periods);

  const Field& field() const { return f_; }
  double dt() const { return dt_; }
  int steps_per_period() const { return spp_; }
  long step_count() const { return n_; }
  const char* isa() const;

 private:
  void step_once();
  void apply_reaction(double h, int stage);
  void cn_solve(double t_new);
  void enforce_dirichlet(double t_new);
  double boundary_target(const BoundarySide& side, double t_new) const;
  const std::vector<double>& coeff_row(int stage, double t_stage);

  env::PeriodicEnvironment env_;
  Frame frame_;
  BoundaryPolicy bc_;
  StepperConfig cfg_;
  Field f_;
  double t0_ = 0.0;
  double dt_ = 0.0;
  int spp_ = 0;
  long n_ = 0;
  double cap_ = 0.0;

  // Crank-Nicolson matrices: A u_new = B u_old with constant interior rows.
  double bl_ = 0, bd_ = 0, bu_ = 0;       // explicit half (B)
  std::vector<double> aw_, adp_, aup_;    // prefactored Thomas for A
  double a_first_diag_ = 1, a_first_up_ = 0;
  double a_last_diag_ = 1, a_last_low_ = 0;

  std::vector<double> rhs_, scratch_row_;
  bool cache_rows_ = false;
  int stages_ = 1;
  std::vector<std::vector<std::vector<double>>> row_cache_;  // [stage][phase]
  std::vector<std::vector<double>> slope_cache_;             // [stage][phase]
};

/// One-shot wrappers over a stepping session.
Field step(Field f, const env::PeriodicEnvironment& e, const Frame& frame,
           const BoundaryPolicy& bc, const StepperConfig& cfg);

Field integrate_periods(Field f, const env::PeriodicEnvironment& e,
                        const Frame& frame, const BoundaryPolicy& bc,
                        const StepperConfig& cfg, long n_periods);

}  // namespace rdshift::pde
