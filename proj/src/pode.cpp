#include "rdshift/pode.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rdshift/errors.hpp"
#include "rdshift/numerics.hpp"

namespace rdshift::pode {

namespace {

namespace odeint = boost::numeric::odeint;

constexpr double kOdeTol = 1e-12;

/// March u' = u h(t, u) from (t0, u0) to t1, optionally recording the state
/// at the closed uniform mesh times handed in (which must be increasing and
/// start at t0 / end at t1).
double march(const std::function<double(double, double)>& h, double t0,
             double t1, double u0, const std::vector<double>* mesh_times,
             std::vector<double>* mesh_values) {
  auto rhs = [&h](const double& u, double& dudt, double t) {
    dudt = u * h(t, u);
  };
  auto stepper =
      odeint::make_controlled(kOdeTol, kOdeTol,
                              odeint::runge_kutta_cash_karp54<double>());
  double u = u0;
  if (!mesh_times) {
    odeint::integrate_adaptive(stepper, rhs, u, t0, t1,
                               (t1 - t0) * 1e-3 + 1e-12);
    return u;
  }
  mesh_values->clear();
  mesh_values->reserve(mesh_times->size());
  mesh_values->push_back(u0);
  for (size_t j = 0; j + 1 < mesh_times->size(); ++j) {
    const double a = (*mesh_times)[j], b = (*mesh_times)[j + 1];
    odeint::integrate_adaptive(stepper, rhs, u, a, b, (b - a) * 0.25);
    mesh_values->push_back(u);
  }
  return u;
}

void check_h_monotone(const std::function<double(double, double)>& h, double T,
                      double u_hi) {
  const int nt = 16, nu = 9;
  for (int i = 0; i < nt; ++i) {
    const double t = T * i / nt;
    double prev = h(t, 0.0);
    for (int k = 1; k < nu; ++k) {
      const double u = u_hi * k / (nu - 1);
      const double cur = h(t, u);
      if (cur > prev + 1e-10 * (1.0 + std::abs(prev))) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "h increases in u at t=%.6g, u=%.6g (%.6g -> %.6g)", t,
                      u, prev, cur);
        throw AssumptionViolation(buf);
      }
      prev = cur;
    }
  }
}

std::vector<double> uniform_mesh(double T, int m) {
  std::vector<double> t(static_cast<size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) t[static_cast<size_t>(j)] = T * j / m;
  return t;
}

}  // namespace

double PeriodicOrbit::value_at(double t) const {
  // drop the duplicated wrap sample for the periodic interpolation
  return num::periodic_cubic(
      std::span<const double>(values.data(), values.size() - 1), period, t);
}

double PeriodicOrbit::min_value() const {
  return *std::min_element(values.begin(), values.end());
}

double PeriodicOrbit::max_value() const {
  return *std::max_element(values.begin(), values.end());
}

double integrate_scalar(const std::function<double(double, double)>& h,
                        double t0, double t1, double u0) {
  if (!(t1 > t0)) throw InvalidArgument("integrate_scalar: t1 must exceed t0");
  return march(h, t0, t1, u0, nullptr, nullptr);
}

double displacement(const std::function<double(double, double)>& h, double T,
                    double u0) {
  return integrate_scalar(h, 0.0, T, u0) - u0;
}

PeriodicOrbit solve_periodic_orbit(const std::function<double(double, double)>& h,
                                   double T, const OrbitOptions& opt) {
  if (!(T > 0)) throw InvalidArgument("solve_periodic_orbit: T must be positive");
  if (!(opt.lo > 0) || !(opt.hi > opt.lo))
    throw InvalidArgument("solve_periodic_orbit: bad bracket");
  if (opt.check_monotone) check_h_monotone(h, T, opt.hi);

  const double mean0 =
      num::mean_over_period([&](double t) { return h(t, 0.0); }, T);
  if (!(mean0 > 0)) {
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "solve_periodic_orbit: mean of h(t,0) is %.6g (needs > 0)",
                  mean0);
    throw NoSignChange(buf);
  }

  auto disp = [&](double u0) { return displacement(h, T, u0); };
  const auto root = num::bisect(disp, opt.lo, opt.hi, opt.tol, opt.tol, 400);

  PeriodicOrbit orbit;
  orbit.period = T;
  orbit.tol = opt.tol;

  int m = opt.mesh;
  std::vector<double> mesh_t = uniform_mesh(T, m);
  std::vector<double> vals;
  march(h, 0.0, T, root.root, &mesh_t, &vals);
  for (int round = 0; round < opt.max_refine; ++round) {
    const int m2 = 2 * m;
    std::vector<double> mesh2 = uniform_mesh(T, m2);
    std::vector<double> vals2;
    march(h, 0.0, T, root.root, &mesh2, &vals2);
    double change = 0;
    for (int j = 0; j <= m; ++j)
      change = std::max(change, std::abs(vals2[static_cast<size_t>(2 * j)] -
                                         vals[static_cast<size_t>(j)]));
    m = m2;
    vals.swap(vals2);
    if (change < opt.tol / 10.0) break;
  }
  orbit.values = std::move(vals);
  orbit.residual = std::abs(orbit.values.back() - orbit.values.front());
  return orbit;
}

PeriodicOrbit periodic_weight(const std::function<double(double)>& a, double T,
                              int mesh, double mean_tol) {
  if (!(T > 0)) throw InvalidArgument("periodic_weight: T must be positive");
  const double mean = num::mean_over_period(a, T);
  if (std::abs(mean) > mean_tol) {
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "periodic_weight: coefficient mean %.3e exceeds %.1e", mean,
                  mean_tol);
    throw NotZeroMean(buf);
  }
  auto cum = num::cumulative_integral(a, T, mesh);
  PeriodicOrbit p;
  p.period = T;
  p.tol = mean_tol;
  p.values.resize(cum.size());
  for (size_t j = 0; j < cum.size(); ++j) p.values[j] = std::exp(cum[j]);
  p.residual = std::abs(p.values.back() - p.values.front());
  return p;
}

PeriodicOrbit linear_periodic_solution(const std::function<double(double)>& a,
                                       const std::function<double(double)>& f,
                                       double T, int mesh) {
  if (!(T > 0)) throw InvalidArgument("linear_periodic_solution: T must be positive");
  auto A = num::cumulative_integral(a, T, mesh);  // A_j = int_0^{t_j} a
  const double AT = A.back();
  if (std::abs(AT) < 1e-10)
    throw InvalidArgument(
        "linear_periodic_solution: mean of a is ~0; no unique periodic solution");
  const double h = T / mesh;
  // v(0) = [int_0^T e^{A(T)-A(s)} f(s) ds] / (1 - e^{A(T)})
  // The exponent increment within a panel is short, so a fixed-order Gauss
  // rule resolves it to machine precision; nesting an adaptive rule here
  // would make the outer integrand non-smooth at the error-estimate level.
  using gauss30 = boost::math::quadrature::gauss<double, 30>;
  double I = 0.0;
  std::vector<double> panel(static_cast<size_t>(mesh), 0.0);
  for (int j = 0; j < mesh; ++j) {
    const double t0 = j * h;
    const double A0 = A[static_cast<size_t>(j)];
    auto integrand = [&](double s) {
      const double As = A0 + (s > t0 ? gauss30::integrate(a, t0, s) : 0.0);
      return std::exp(-As) * f(s);
    };
    panel[static_cast<size_t>(j)] =
        num::integrate(integrand, t0, t0 + h, 1e-12);
    I += panel[static_cast<size_t>(j)];
  }
  // I = int_0^T e^{-A(s)} f(s) ds; v0 = e^{AT} I / (1 - e^{AT})
  const double v0 = std::exp(AT) * I / (1.0 - std::exp(AT));
  PeriodicOrbit v;
  v.period = T;
  v.values.resize(static_cast<size_t>(mesh) + 1);
  double acc = 0.0;  // int_0^{t_j} e^{-A} f
  for (int j = 0; j <= mesh; ++j) {
    if (j > 0) acc += panel[static_cast<size_t>(j - 1)];
    v.values[static_cast<size_t>(j)] =
        std::exp(A[static_cast<size_t>(j)]) * (v0 + acc);
  }
  v.residual = std::abs(v.values.back() - v.values.front());
  v.tol = 1e-10;
  return v;
}

}  // namespace rdshift::pode
