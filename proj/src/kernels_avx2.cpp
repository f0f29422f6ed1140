// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after a cpuid check.
#include "rdshift/kernels.hpp"

#if defined(RDSHIFT_HAVE_AVX2_TU)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace rdshift::kernels {
namespace {

inline __m256d abs_pd(__m256d x) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  return _mm256_and_pd(x, mask);
}

void reaction_avx2(double* u, const double* b, double s, double h, double cap,
                   std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d vh = _mm256_set1_pd(h);
  const __m256d vhh = _mm256_set1_pd(0.5 * h);
  const __m256d vcap = _mm256_set1_pd(cap);
  const __m256d vzero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vu = _mm256_loadu_pd(u + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    const __m256d uc = _mm256_min_pd(vu, vcap);
    // us = clamp(uc + hh*uc*(b - s*uc), 0, cap)
    __m256d f = _mm256_mul_pd(uc, _mm256_fnmadd_pd(vs, uc, vb));
    __m256d us = _mm256_fmadd_pd(vhh, f, uc);
    us = _mm256_min_pd(_mm256_max_pd(us, vzero), vcap);
    // u = max(0, u + h*us*(b - s*us))
    f = _mm256_mul_pd(us, _mm256_fnmadd_pd(vs, us, vb));
    const __m256d out = _mm256_max_pd(vzero, _mm256_fmadd_pd(vh, f, vu));
    _mm256_storeu_pd(u + i, out);
  }
  for (; i < n; ++i) {
    const double uc = std::min(u[i], cap);
    double us = uc + 0.5 * h * uc * std::fma(-s, uc, b[i]);
    us = std::clamp(us, 0.0, cap);
    u[i] = std::max(0.0, u[i] + h * us * std::fma(-s, us, b[i]));
  }
}

void stencil3_avx2(const double* u, double bl, double bd, double bu,
                   double* out, std::size_t n) {
  if (n < 3) return;
  const __m256d vl = _mm256_set1_pd(bl);
  const __m256d vd = _mm256_set1_pd(bd);
  const __m256d vu_ = _mm256_set1_pd(bu);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    const __m256d a = _mm256_loadu_pd(u + i - 1);
    const __m256d c = _mm256_loadu_pd(u + i);
    const __m256d r = _mm256_loadu_pd(u + i + 1);
    __m256d acc = _mm256_mul_pd(vl, a);
    acc = _mm256_fmadd_pd(vd, c, acc);
    acc = _mm256_fmadd_pd(vu_, r, acc);
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i + 1 < n; ++i)
    out[i] = std::fma(bl, u[i - 1], std::fma(bd, u[i], bu * u[i + 1]));
}

double sup_abs_avx2(const double* a, std::size_t n) {
  __m256d vm = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, abs_pd(_mm256_loadu_pd(a + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vm);
  double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

double sup_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d vm = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    vm = _mm256_max_pd(vm, abs_pd(d));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vm);
  double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
  for (; i < n; ++i) s += a[i];
  return s;
}

}  // namespace

const Table& avx2_table() {
  static const Table t{reaction_avx2, stencil3_avx2, sup_abs_avx2,
                       sup_abs_diff_avx2, sum_avx2, "avx2"};
  return t;
}

}  // namespace rdshift::kernels

#endif  // RDSHIFT_HAVE_AVX2_TU
