#pragma once

#include <cstddef>

namespace rdshift::kernels {

/// Hot inner loops of the stepper, provided as a scalar reference
/// implementation and (on x86_64) an AVX2+FMA variant selected once at
/// runtime. The Thomas solve is intentionally absent: its forward/backward
/// recurrences are sequentially dependent and stay scalar in the stepper.
///
/// reaction_affine_midpoint: explicit midpoint step for u' = u*(b(x) - s*u)
/// with the coefficient row frozen at the substep's half-time:
///   uc   = min(u, cap)
///   us   = clamp(uc + (h/2) * uc * (b - s*uc), 0, cap)
///   u   <- max(0, u + h * us * (b - s*us))
/// Keeps non-negativity and (for h * Lip < 1) monotonicity in the data.
///
/// stencil3: out[i] = bl*u[i-1] + bd*u[i] + bu*u[i+1] on the interior
/// i = 1..n-2 (boundary rows are scheme-specific and filled by the caller).
struct Table {
  void (*reaction_affine_midpoint)(double* u, const double* b, double s,
                                   double h, double cap, std::size_t n);
  void (*stencil3)(const double* u, double bl, double bd, double bu,
                   double* out, std::size_t n);
  double (*sup_abs)(const double* a, std::size_t n);
  double (*sup_abs_diff)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  const char* isa;
};

const Table& scalar_table();

/// Dispatched table: AVX2+FMA when the CPU supports both, unless the
/// environment variable RDSHIFT_FORCE_SCALAR=1 overrides. Resolved once.
const Table& active_table();

bool avx2_supported();

#if defined(RDSHIFT_HAVE_AVX2_TU)
const Table& avx2_table();
#endif

}  // namespace rdshift::kernels
