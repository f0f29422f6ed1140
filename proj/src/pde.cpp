#include "rdshift/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rdshift/errors.hpp"
#include "rdshift/kernels.hpp"

namespace rdshift::pde {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

/// Sampled bound on |d/du (u G)| over the stepping domain; gates the
/// explicit reaction substep (monotone while dt * Lip < 1).
double sampled_reaction_lipschitz(const env::PeriodicEnvironment& e) {
  const double cap = e.u_clamp_cap();
  const double span = 1.1 * e.limit_cutoff;
  double lip = 0.0;
  for (int it = 0; it < 13; ++it) {
    const double t = e.period * it / 13.0;
    for (int ix = -1; ix <= 9; ++ix) {
      const double xi = (ix < 0)   ? -1e9
                        : (ix > 8) ? 1e9
                                   : -span + 2.0 * span * ix / 8.0;
      double prev = 0.0;  // u=0 -> u*G = 0
      const int nu = 8;
      for (int iu = 1; iu <= nu; ++iu) {
        const double u = cap * iu / nu;
        const double f = u * e.eval(t, xi, u);
        lip = std::max(lip, std::abs(f - prev) / (cap / nu));
        prev = f;
      }
    }
  }
  return lip;
}

}  // namespace

void Grid1D::validate() const {
  require(n >= 3, "Grid1D: need at least 3 nodes");
  require(x_min < x_max && std::isfinite(x_min) && std::isfinite(x_max),
          "Grid1D: x_min < x_max required");
}

Field make_field(const Grid1D& grid, double t,
                 const std::function<double(double)>& f) {
  grid.validate();
  Field out;
  out.grid = grid;
  out.t = t;
  out.values.resize(static_cast<size_t>(grid.n));
  for (int i = 0; i < grid.n; ++i)
    out.values[static_cast<size_t>(i)] = f(grid.x(i));
  return out;
}

Stepper::Stepper(env::PeriodicEnvironment e, Frame frame, BoundaryPolicy bc,
                 StepperConfig cfg, Field initial)
    : env_(std::move(e)),
      frame_(frame),
      bc_(std::move(bc)),
      cfg_(cfg),
      f_(std::move(initial)) {
  f_.grid.validate();
  const double T = env_.period;
  require(T > 0 && std::isfinite(T), "Stepper: positive period required");
  require(std::isfinite(f_.t), "Stepper: field time must be finite");
  require(f_.values.size() == static_cast<size_t>(f_.grid.n),
          "Stepper: field size does not match grid");
  for (double v : f_.values)
    require(std::isfinite(v) && v >= 0.0,
            "Stepper: initial field must be finite and non-negative");

  if (cfg_.dt > 0.0) {
    const double q = T / cfg_.dt;
    const long spp = std::lround(q);
    require(spp >= 1 && std::abs(q - static_cast<double>(spp)) <=
                            1e-12 * std::max(1.0, std::abs(q)),
            "Stepper: T/dt must be an integer (within 1e-12)");
    spp_ = static_cast<int>(spp);
    dt_ = cfg_.dt;
  } else {
    require(cfg_.steps_per_period >= 1,
            "Stepper: steps_per_period must be >= 1");
    spp_ = cfg_.steps_per_period;
    dt_ = T / spp_;
  }
  t0_ = f_.t;
  cap_ = env_.u_clamp_cap();

  for (const BoundarySide* side : {&bc_.left, &bc_.right}) {
    if (side->kind != BoundaryKind::clamp_to_orbit) continue;
    require(!side->orbit.values.empty() && side->orbit.min_value() > 0.0,
            "Stepper: clamp_to_orbit requires a positive orbit");
    require(std::abs(side->orbit.period - T) <= 1e-9 * std::max(1.0, T),
            "Stepper: clamp orbit period must match the environment");
  }

  const double dx = f_.grid.dx();
  const double b = frame_.advection();
  if (std::abs(b) * dt_ / dx > 1.0 + 1e-12) {
    std::ostringstream os;
    os << "CFL violation: |c|*dt/dx = " << std::abs(b) * dt_ / dx
       << " > 1 (c=" << b << ", dt=" << dt_ << ", dx=" << dx << ")";
    throw CflViolation(os.str());
  }
  const double lip = sampled_reaction_lipschitz(env_);
  if (dt_ * lip > 0.9) {
    std::ostringstream os;
    os << "reaction too stiff for explicit substep: dt*Lip = " << dt_ * lip
       << " > 0.9 (sampled Lip=" << lip << "); decrease dt";
    throw CflViolation(os.str());
  }

  // Advection: centered differencing is second order and, as long as the
  // cell Peclet number |b|dx/2 stays at or below 1, leaves both off-diagonals
  // of L non-negative.  First-order upwinding would add numerical diffusion
  // |b|dx/2, which shifts the decay exponents of travelling tails enough to
  // break the envelope pinching on long runs.  Beyond the Peclet limit fall
  // back to the upwinded one-sided difference.  Either way A = I - dt/2 L is
  // an M-matrix and B = I + dt/2 L is non-negative under the diagonal check
  // below, which is what the comparison-principle guarantees rely on.
  double ll, lu;
  if (std::abs(b) * dx <= 2.0) {
    ll = 1.0 / (dx * dx) - 0.5 * b / dx;
    lu = 1.0 / (dx * dx) + 0.5 * b / dx;
  } else {
    ll = 1.0 / (dx * dx) + std::max(-b, 0.0) / dx;
    lu = 1.0 / (dx * dx) + std::max(b, 0.0) / dx;
  }
  const double ld = -(ll + lu);
  bl_ = 0.5 * dt_ * ll;
  bd_ = 1.0 + 0.5 * dt_ * ld;
  bu_ = 0.5 * dt_ * lu;
  if (bd_ < 0.0) {
    std::ostringstream os;
    os << "explicit Crank-Nicolson half loses positivity: 1 - dt/dx^2 - "
          "|c|dt/(2dx) = "
       << bd_ << "; increase steps per period or coarsen the grid";
    throw CflViolation(os.str());
  }

  const int n = f_.grid.n;
  std::vector<double> low(static_cast<size_t>(n), -0.5 * dt_ * ll);
  std::vector<double> diag(static_cast<size_t>(n), 1.0 - 0.5 * dt_ * ld);
  aup_.assign(static_cast<size_t>(n), -0.5 * dt_ * lu);
  const double r = dt_ / (dx * dx);
  if (bc_.left.kind == BoundaryKind::neumann_zero) {
    diag[0] = 1.0 + r;
    aup_[0] = -r;
  } else {
    diag[0] = 1.0;
    aup_[0] = 0.0;
  }
  low[0] = 0.0;
  if (bc_.right.kind == BoundaryKind::neumann_zero) {
    diag[static_cast<size_t>(n - 1)] = 1.0 + r;
    low[static_cast<size_t>(n - 1)] = -r;
  } else {
    diag[static_cast<size_t>(n - 1)] = 1.0;
    low[static_cast<size_t>(n - 1)] = 0.0;
  }
  aup_[static_cast<size_t>(n - 1)] = 0.0;

  // Thomas prefactorization (diagonally dominant, no pivoting needed).
  aw_.assign(static_cast<size_t>(n), 0.0);
  adp_.assign(static_cast<size_t>(n), 0.0);
  adp_[0] = diag[0];
  for (int i = 1; i < n; ++i) {
    aw_[static_cast<size_t>(i)] =
        low[static_cast<size_t>(i)] / adp_[static_cast<size_t>(i - 1)];
    adp_[static_cast<size_t>(i)] =
        diag[static_cast<size_t>(i)] -
        aw_[static_cast<size_t>(i)] * aup_[static_cast<size_t>(i - 1)];
  }

  rhs_.assign(static_cast<size_t>(n), 0.0);
  scratch_row_.assign(static_cast<size_t>(n), 0.0);
  stages_ = (cfg_.scheme == Scheme::strang) ? 2 : 1;
  cache_rows_ = env_.affine() &&
                (frame_.kind == Frame::Kind::moving || frame_.c == 0.0);
  if (cache_rows_) {
    row_cache_.assign(static_cast<size_t>(stages_), {});
    slope_cache_.assign(static_cast<size_t>(stages_), {});
    for (int s = 0; s < stages_; ++s) {
      row_cache_[static_cast<size_t>(s)].resize(static_cast<size_t>(spp_));
      slope_cache_[static_cast<size_t>(s)].assign(static_cast<size_t>(spp_),
                                                  0.0);
    }
  }
}

const char* Stepper::isa() const { return kernels::active_table().isa; }

double Stepper::boundary_target(const BoundarySide& side, double t_new) const {
  return side.kind == BoundaryKind::clamp_to_orbit ? side.orbit.value_at(t_new)
                                                   : 0.0;
}

const std::vector<double>& Stepper::coeff_row(int stage, double t_stage) {
  const int n = f_.grid.n;
  if (cache_rows_) {
    const int phase = static_cast<int>(n_ % spp_);
    auto& row = row_cache_[static_cast<size_t>(stage)][static_cast<size_t>(phase)];
    if (row.empty()) {
      row.resize(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i)
        row[static_cast<size_t>(i)] = env_.eval_base(t_stage, f_.grid.x(i));
      slope_cache_[static_cast<size_t>(stage)][static_cast<size_t>(phase)] =
          env_.slope(t_stage);
    }
    return row;
  }
  const double shift = frame_.c * t_stage;  // lab frame: xi = x - c t
  for (int i = 0; i < n; ++i)
    scratch_row_[static_cast<size_t>(i)] =
        env_.eval_base(t_stage, f_.grid.x(i) - shift);
  return scratch_row_;
}

void Stepper::apply_reaction(double h, int stage) {
  const int n = f_.grid.n;
  const double off = (cfg_.scheme == Scheme::strang)
                         ? (stage == 0 ? 0.25 : 0.75)
                         : 0.5;
  const double t_stage = t0_ + (static_cast<double>(n_) + off) * dt_;
  double* u = f_.values.data();
  if (env_.affine()) {
    const auto& row = coeff_row(stage, t_stage);
    const double s =
        cache_rows_
            ? slope_cache_[static_cast<size_t>(stage)]
                          [static_cast<size_t>(n_ % spp_)]
            : env_.slope(t_stage);
    kernels::active_table().reaction_affine_midpoint(
        u, row.data(), s, h, cap_, static_cast<size_t>(n));
    return;
  }
  const double shift =
      (frame_.kind == Frame::Kind::lab) ? frame_.c * t_stage : 0.0;
  for (int i = 0; i < n; ++i) {
    const double xi = f_.grid.x(i) - shift;
    const double uc = std::min(u[i], cap_);
    const double gm = env_.eval(t_stage, xi, uc);
    const double us =
        std::clamp(uc + 0.5 * h * uc * gm, 0.0, cap_);
    u[i] = std::max(0.0, u[i] + h * us * env_.eval(t_stage, xi, us));
  }
}

void Stepper::cn_solve(double t_new) {
  const int n = f_.grid.n;
  const auto& u = f_.values;
  kernels::active_table().stencil3(u.data(), bl_, bd_, bu_, rhs_.data(),
                                   static_cast<size_t>(n));
  const double dx = f_.grid.dx();
  const double r = dt_ / (dx * dx);
  rhs_[0] = (bc_.left.kind == BoundaryKind::neumann_zero)
                ? u[0] + r * (u[1] - u[0])
                : boundary_target(bc_.left, t_new);
  rhs_[static_cast<size_t>(n - 1)] =
      (bc_.right.kind == BoundaryKind::neumann_zero)
          ? u[static_cast<size_t>(n - 1)] +
                r * (u[static_cast<size_t>(n - 2)] -
                     u[static_cast<size_t>(n - 1)])
          : boundary_target(bc_.right, t_new);

  for (int i = 1; i < n; ++i)
    rhs_[static_cast<size_t>(i)] -=
        aw_[static_cast<size_t>(i)] * rhs_[static_cast<size_t>(i - 1)];
  auto& w = f_.values;
  w[static_cast<size_t>(n - 1)] =
      rhs_[static_cast<size_t>(n - 1)] / adp_[static_cast<size_t>(n - 1)];
  for (int i = n - 2; i >= 0; --i)
    w[static_cast<size_t>(i)] =
        (rhs_[static_cast<size_t>(i)] -
         aup_[static_cast<size_t>(i)] * w[static_cast<size_t>(i + 1)]) /
        adp_[static_cast<size_t>(i)];
  for (double& v : w)
    if (v < 0.0) v = 0.0;  // NaN-transparent: the finite scan must see blowups
}

void Stepper::enforce_dirichlet(double t_new) {
  if (bc_.left.kind != BoundaryKind::neumann_zero)
    f_.values[0] = boundary_target(bc_.left, t_new);
  if (bc_.right.kind != BoundaryKind::neumann_zero)
    f_.values[static_cast<size_t>(f_.grid.n - 1)] =
        boundary_target(bc_.right, t_new);
}

void Stepper::step_once() {
  const double t_new = t0_ + static_cast<double>(n_ + 1) * dt_;
  if (cfg_.scheme == Scheme::strang) {
    apply_reaction(0.5 * dt_, 0);
    cn_solve(t_new);
    apply_reaction(0.5 * dt_, 1);
    enforce_dirichlet(t_new);
  } else {
    apply_reaction(dt_, 0);
    cn_solve(t_new);
  }
  ++n_;
  f_.t = t_new;
}

void Stepper::advance(long steps) {
  require(steps >= 0, "Stepper: cannot step backwards");
  for (long k = 0; k < steps; ++k) {
    step_once();
    if (cfg_.check_finite && (n_ % spp_ == 0 || k == steps - 1)) {
      for (int i = 0; i < f_.grid.n; ++i) {
        if (!std::isfinite(f_.values[static_cast<size_t>(i)])) {
          std::ostringstream os;
          os << "non-finite value at x=" << f_.grid.x(i) << ", t=" << f_.t
             << " (step " << n_ << ")";
          throw NonFiniteValue(os.str());
        }
      }
    }
  }
}

void Stepper::advance_periods(long periods) {
  require(periods >= 0, "Stepper: cannot step backwards");
  advance(periods * spp_);
}

Field step(Field f, const env::PeriodicEnvironment& e, const Frame& frame,
           const BoundaryPolicy& bc, const StepperConfig& cfg) {
  Stepper st(e, frame, bc, cfg, std::move(f));
  st.advance(1);
  return st.field();
}

Field integrate_periods(Field f, const env::PeriodicEnvironment& e,
                        const Frame& frame, const BoundaryPolicy& bc,
                        const StepperConfig& cfg, long n_periods) {
  Stepper st(e, frame, bc, cfg, std::move(f));
  st.advance_periods(n_periods);
  return st.field();
}

}  // namespace rdshift::pde
