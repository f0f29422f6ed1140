#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rdshift::num {

inline constexpr double pi = 3.14159265358979323846;

/// Fractional part in [0, 1); exact for the periodic phase reductions used by
/// the environment kinds (so f(t + T) == f(t) holds bitwise).
inline double frac(double x) {
  double f = x - static_cast<long long>(x);
  return f < 0 ? f + 1.0 : f;
}

/// Adaptive Gauss–Kronrod integral of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

/// (1/T) * integral of f over one period.
double mean_over_period(const std::function<double(double)>& f, double T,
                        double tol = 1e-12);

/// Cumulative integral of f at mesh times j*T/m, j = 0..m (panel-wise
/// Gauss–Kronrod, summed left to right).
std::vector<double> cumulative_integral(const std::function<double(double)>& f,
                                        double T, int m, double tol = 1e-13);

struct BisectResult {
  double root = 0;
  double f_root = 0;
  int iterations = 0;
};

/// Bisection on [lo, hi]; requires f(lo) > 0 > f(hi) or f(lo) < 0 < f(hi)
/// (throws NoSignChange otherwise). Stops when |f| <= ftol and the bracket
/// width is below xtol * max(1, |root|).
BisectResult bisect(const std::function<double(double)>& f, double lo,
                    double hi, double xtol, double ftol, int max_iter = 200);

/// Periodic cubic (Catmull–Rom) interpolation. samples[j] lives at t = j*T/m
/// with m = samples.size(); the curve wraps around.
double periodic_cubic(std::span<const double> samples, double T, double t);

/// Non-periodic cubic (Catmull–Rom, clamped ends) interpolation on a uniform
/// grid starting at x0 with spacing dx; exact at nodes, out-of-range queries
/// clamp to the boundary samples.
double cubic_uniform(std::span<const double> v, double x0, double dx, double x);

/// Linear interpolation on a uniform grid starting at x0 with spacing dx;
/// out-of-range queries return the corresponding fill value.
double lerp_uniform(std::span<const double> v, double x0, double dx, double x,
                    double left_fill, double right_fill);

/// Least-squares fit of y ~ a*f0 + b*f1 + c*f2 for three fixed basis columns.
/// Returns {a, b, c} and the fit rms through the last output argument.
std::vector<double> lsq3(std::span<const double> f0, std::span<const double> f1,
                         std::span<const double> f2, std::span<const double> y,
                         double* rms_out = nullptr);

/// C^2 quintic smoothstep on [0, 1] (0 -> 0, 1 -> 1, flat ends).
inline double smoothstep(double s) {
  if (s <= 0) return 0;
  if (s >= 1) return 1;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

}  // namespace rdshift::num
