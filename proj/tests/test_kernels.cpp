#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rdshift/kernels.hpp"

using namespace rdshift;

TEST_SUITE_BEGIN("kernels");

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed, double lo = 0.0,
                               double hi = 1.5) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

// All sizes crossing the 4-lane boundary plus a large one.
const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 31, 4001};

}  // namespace

TEST_CASE("scalar reaction kernel: fixed points and floors") {
  auto& k = kernels::scalar_table();
  // logistic fixed point u = b/s is stationary
  std::vector<double> u = {0.5, 0.5, 0.5};
  std::vector<double> b = {1.0, 1.0, 1.0};
  k.reaction_affine_midpoint(u.data(), b.data(), 2.0, 0.01, 10.0, u.size());
  for (double x : u) CHECK(x == doctest::Approx(0.5).epsilon(1e-15));
  // u = 0 stays 0; strongly negative b floors at 0
  u = {0.0, 1e-9};
  b = {-500.0, -500.0};
  k.reaction_affine_midpoint(u.data(), b.data(), 1.0, 0.1, 10.0, u.size());
  CHECK(u[0] == 0.0);
  CHECK(u[1] >= 0.0);
}

TEST_CASE("scalar reaction kernel: one midpoint step of logistic") {
  auto& k = kernels::scalar_table();
  const double h = 0.05;
  double u = 0.25;
  std::vector<double> uu = {u}, b = {1.0};
  k.reaction_affine_midpoint(uu.data(), b.data(), 1.0, h, 10.0, 1);
  // explicit midpoint by hand
  const double us = u + 0.5 * h * u * (1 - u);
  const double expect = u + h * us * (1 - us);
  CHECK(uu[0] == doctest::Approx(expect).epsilon(1e-16));
}

TEST_CASE("stencil3 scalar matches direct evaluation") {
  auto& k = kernels::scalar_table();
  auto u = random_vec(33, 7);
  std::vector<double> out(33, -1);
  k.stencil3(u.data(), 0.25, 0.5, 0.3, out.data(), u.size());
  for (std::size_t i = 1; i + 1 < u.size(); ++i)
    CHECK(out[i] == doctest::Approx(0.25 * u[i - 1] + 0.5 * u[i] + 0.3 * u[i + 1])
                        .epsilon(1e-15));
  CHECK(out[0] == -1);      // boundary rows untouched
  CHECK(out.back() == -1);
}

TEST_CASE("reductions: scalar reference values") {
  auto& k = kernels::scalar_table();
  std::vector<double> a = {-3.0, 1.0, 2.5};
  std::vector<double> b = {-1.0, 1.0, 2.5};
  CHECK(k.sup_abs(a.data(), 3) == 3.0);
  CHECK(k.sup_abs_diff(a.data(), b.data(), 3) == 2.0);
  CHECK(k.sum(a.data(), 3) == doctest::Approx(0.5));
}

TEST_CASE("dispatch reports a valid table") {
  auto& t = kernels::active_table();
  CHECK((std::string(t.isa) == "scalar" || std::string(t.isa) == "avx2"));
  if (kernels::avx2_supported()) {
    // On this host the dispatched table should be the vector one unless
    // RDSHIFT_FORCE_SCALAR was exported before the first call.
    const char* force = std::getenv("RDSHIFT_FORCE_SCALAR");
    if (!(force && force[0] == '1')) CHECK(std::string(t.isa) == "avx2");
  }
}

#if defined(RDSHIFT_HAVE_AVX2_TU)
TEST_CASE("avx2 kernels agree with scalar reference") {
  if (!kernels::avx2_supported()) return;
  auto& ks = kernels::scalar_table();
  auto& kv = kernels::avx2_table();
  for (std::size_t n : kSizes) {
    CAPTURE(n);
    auto u0 = random_vec(n, static_cast<unsigned>(17 * n + 1));
    auto b = random_vec(n, static_cast<unsigned>(17 * n + 2), -1.0, 1.5);

    // reaction: elementwise, FMA rounding differences only
    auto us = u0, uv = u0;
    ks.reaction_affine_midpoint(us.data(), b.data(), 1.0, 0.002, 15.0, n);
    kv.reaction_affine_midpoint(uv.data(), b.data(), 1.0, 0.002, 15.0, n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(uv[i] == doctest::Approx(us[i]).epsilon(1e-14));

    // stencil
    std::vector<double> os(n, 0), ov(n, 0);
    ks.stencil3(u0.data(), 0.1, 0.77, 0.13, os.data(), n);
    kv.stencil3(u0.data(), 0.1, 0.77, 0.13, ov.data(), n);
    for (std::size_t i = 1; i + 1 < n; ++i)
      CHECK(ov[i] == doctest::Approx(os[i]).epsilon(1e-14));

    // max-reductions are order-independent: require exact equality
    auto d = random_vec(n, static_cast<unsigned>(17 * n + 3), -2.0, 2.0);
    CHECK(kv.sup_abs(d.data(), n) == ks.sup_abs(d.data(), n));
    CHECK(kv.sup_abs_diff(d.data(), u0.data(), n) ==
          ks.sup_abs_diff(d.data(), u0.data(), n));

    // sums reassociate: tolerance scaled by n
    CHECK(kv.sum(d.data(), n) ==
          doctest::Approx(ks.sum(d.data(), n)).epsilon(1e-13));
  }
}
#endif

TEST_SUITE_END();
