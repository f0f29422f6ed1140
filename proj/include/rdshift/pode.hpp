#pragma once

#include <functional>
#include <vector>

namespace rdshift::pode {

/// A T-periodic scalar trajectory sampled on a uniform mesh
/// t_j = j*T/m, j = 0..m (closed mesh; values[m] wraps to values[0] up to
/// residual). Also reused as a plain "periodic sampled function" container.
struct PeriodicOrbit {
  double period = 1.0;
  std::vector<double> values;  // size m+1
  double residual = 0.0;       // |u(T) - u(0)| of the defining trajectory
  double tol = 0.0;

  int mesh() const { return static_cast<int>(values.size()) - 1; }
  double value_at(double t) const;  // periodic cubic interpolation
  double min_value() const;
  double max_value() const;
};

struct OrbitOptions {
  double tol = 1e-10;
  double lo = 1e-6;    // bracket for u(0)
  double hi = 10.0;
  int mesh = 256;      // per period; refined x2 until mesh change < tol/10
  int max_refine = 4;
  bool check_monotone = true;  // sampled non-increase of h in u
};

/// u(t1) for u' = u h(t, u), u(t0) = u0 (adaptive, tolerances ~1e-12).
double integrate_scalar(const std::function<double(double, double)>& h,
                        double t0, double t1, double u0);

/// Poincare displacement u(T; u0) - u0 of u' = u h(t, u).
double displacement(const std::function<double(double, double)>& h, double T,
                    double u0);

/// The unique positive T-periodic solution of u' = u h(t, u) for h
/// non-increasing in u with (1/T) int h(t,0) dt > 0: located by bisection on
/// the Poincare displacement, then sampled on the mesh.
PeriodicOrbit solve_periodic_orbit(const std::function<double(double, double)>& h,
                                   double T, const OrbitOptions& opt = {});

/// p(t) = exp(int_0^t a) for zero-mean a (throws NotZeroMean otherwise;
/// mean checked against mean_tol).
PeriodicOrbit periodic_weight(const std::function<double(double)>& a, double T,
                              int mesh = 256, double mean_tol = 1e-8);

/// The unique T-periodic solution of v' = a(t) v + f(t) when the mean of a
/// is bounded away from zero (closed form via integrating factors).
PeriodicOrbit linear_periodic_solution(const std::function<double(double)>& a,
                                       const std::function<double(double)>& f,
                                       double T, int mesh = 256);

}  // namespace rdshift::pode
