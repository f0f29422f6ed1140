#include <cstdlib>

#include "rdshift/kernels.hpp"

namespace rdshift::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table& active_table() {
  static const Table* chosen = [] {
    const char* force = std::getenv("RDSHIFT_FORCE_SCALAR");
    if (force && force[0] == '1') return &scalar_table();
#if defined(RDSHIFT_HAVE_AVX2_TU)
    if (avx2_supported()) return &avx2_table();
#endif
    return &scalar_table();
  }();
  return *chosen;
}

}  // namespace rdshift::kernels
