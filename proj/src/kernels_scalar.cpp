#include <algorithm>
#include <cmath>

#include "rdshift/kernels.hpp"

namespace rdshift::kernels {
namespace {

void reaction_scalar(double* u, const double* b, double s, double h,
                     double cap, std::size_t n) {
  const double hh = 0.5 * h;
  for (std::size_t i = 0; i < n; ++i) {
    const double uc = std::min(u[i], cap);
    double us = uc + hh * uc * (b[i] - s * uc);
    us = std::clamp(us, 0.0, cap);
    const double out = u[i] + h * us * (b[i] - s * us);
    u[i] = (out < 0.0) ? 0.0 : out;  // NaN-transparent floor
  }
}

void stencil3_scalar(const double* u, double bl, double bd, double bu,
                     double* out, std::size_t n) {
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = bl * u[i - 1] + bd * u[i] + bu * u[i + 1];
}

double sup_abs_scalar(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

double sup_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double sum_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

}  // namespace

const Table& scalar_table() {
  static const Table t{reaction_scalar, stencil3_scalar, sup_abs_scalar,
                       sup_abs_diff_scalar, sum_scalar, "scalar"};
  return t;
}

}  // namespace rdshift::kernels
