#include "rdshift/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rdshift/errors.hpp"

namespace rdshift::num {

namespace {
using gk15 = boost::math::quadrature::gauss_kronrod<double, 15>;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (!(b > a)) {
    if (a == b) return 0.0;
    throw InvalidArgument("integrate: requires b > a");
  }
  return gk15::integrate(f, a, b, 12, tol);
}

double mean_over_period(const std::function<double(double)>& f, double T,
                        double tol) {
  if (!(T > 0)) throw InvalidArgument("mean_over_period: T must be positive");
  return integrate(f, 0.0, T, tol) / T;
}

std::vector<double> cumulative_integral(const std::function<double(double)>& f,
                                        double T, int m, double tol) {
  if (m < 2) throw InvalidArgument("cumulative_integral: need m >= 2");
  std::vector<double> out(static_cast<size_t>(m) + 1, 0.0);
  const double h = T / m;
  double acc = 0.0;
  for (int j = 0; j < m; ++j) {
    acc += gk15::integrate(f, j * h, (j + 1) * h, 10, tol);
    out[static_cast<size_t>(j) + 1] = acc;
  }
  return out;
}

BisectResult bisect(const std::function<double(double)>& f, double lo,
                    double hi, double xtol, double ftol, int max_iter) {
  if (!(lo < hi)) throw InvalidArgument("bisect: requires lo < hi");
  double flo = f(lo), fhi = f(hi);
  if (flo == 0) return {lo, 0.0, 0};
  if (fhi == 0) return {hi, 0.0, 0};
  if ((flo > 0) == (fhi > 0)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "bisect: no sign change on [%g, %g] (f: %g, %g)", lo, hi,
                  flo, fhi);
    throw NoSignChange(buf);
  }
  double mid = lo, fmid = flo;
  for (int it = 1; it <= max_iter; ++it) {
    mid = 0.5 * (lo + hi);
    fmid = f(mid);
    if ((fmid > 0) == (flo > 0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
    if (std::abs(fmid) <= ftol &&
        (hi - lo) <= xtol * std::max(1.0, std::abs(mid)))
      return {mid, fmid, it};
  }
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "bisect: %d iterations exhausted (|f| = %g, width = %g)",
                max_iter, std::abs(fmid), hi - lo);
  throw RootBracketFailure(buf);
}

double periodic_cubic(std::span<const double> samples, double T, double t) {
  const int m = static_cast<int>(samples.size());
  if (m < 4) throw InvalidArgument("periodic_cubic: need >= 4 samples");
  const double phase = frac(t / T) * m;
  int j = static_cast<int>(phase);
  if (j >= m) j = m - 1;
  const double s = phase - j;
  auto at = [&](int k) { return samples[static_cast<size_t>(((k % m) + m) % m)]; };
  const double p0 = at(j - 1), p1 = at(j), p2 = at(j + 1), p3 = at(j + 2);
  // Catmull-Rom in Horner form.
  return p1 + 0.5 * s *
                  (p2 - p0 +
                   s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                        s * (3.0 * (p1 - p2) + p3 - p0)));
}

double cubic_uniform(std::span<const double> v, double x0, double dx, double x) {
  const int n = static_cast<int>(v.size());
  if (n < 2) throw InvalidArgument("cubic_uniform: need >= 2 samples");
  const double s_all = (x - x0) / dx;
  if (s_all <= 0) return v[0];
  if (s_all >= n - 1) return v[static_cast<size_t>(n - 1)];
  int i = static_cast<int>(s_all);
  if (i >= n - 1) i = n - 2;
  const double s = s_all - i;
  // Clamped Catmull-Rom: end neighbors duplicate the boundary sample.
  auto at = [&](int k) {
    return v[static_cast<size_t>(std::clamp(k, 0, n - 1))];
  };
  const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
  return p1 + 0.5 * s *
                  (p2 - p0 +
                   s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                        s * (3.0 * (p1 - p2) + p3 - p0)));
}

double lerp_uniform(std::span<const double> v, double x0, double dx, double x,
                    double left_fill, double right_fill) {
  const int n = static_cast<int>(v.size());
  const double s = (x - x0) / dx;
  if (s <= 0) return s < 0 ? left_fill : v[0];
  if (s >= n - 1) return s > n - 1 ? right_fill : v[static_cast<size_t>(n - 1)];
  const int i = static_cast<int>(s);
  const double w = s - i;
  return (1.0 - w) * v[static_cast<size_t>(i)] + w * v[static_cast<size_t>(i) + 1];
}

std::vector<double> lsq3(std::span<const double> f0, std::span<const double> f1,
                         std::span<const double> f2, std::span<const double> y,
                         double* rms_out) {
  const size_t n = y.size();
  if (f0.size() != n || f1.size() != n || f2.size() != n)
    throw InvalidArgument("lsq3: column length mismatch");
  if (n < 3) throw InsufficientData("lsq3: need at least 3 samples");
  // Normal equations G c = r with G symmetric 3x3.
  double G[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double r[3] = {0, 0, 0};
  for (size_t k = 0; k < n; ++k) {
    const double phi[3] = {f0[k], f1[k], f2[k]};
    for (int i = 0; i < 3; ++i) {
      r[i] += phi[i] * y[k];
      for (int j = 0; j < 3; ++j) G[i][j] += phi[i] * phi[j];
    }
  }
  auto det3 = [](const double a[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double d = det3(G);
  if (std::abs(d) < 1e-300) throw InsufficientData("lsq3: singular normal equations");
  std::vector<double> c(3);
  for (int k = 0; k < 3; ++k) {
    double Gk[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) Gk[i][j] = (j == k) ? r[i] : G[i][j];
    c[static_cast<size_t>(k)] = det3(Gk) / d;
  }
  if (rms_out) {
    double ss = 0;
    for (size_t k = 0; k < n; ++k) {
      const double e = y[k] - (c[0] * f0[k] + c[1] * f1[k] + c[2] * f2[k]);
      ss += e * e;
    }
    *rms_out = std::sqrt(ss / static_cast<double>(n));
  }
  return c;
}

}  // namespace rdshift::num
