#include <doctest.h>

#include <cmath>
#include <vector>

#include "dapose/kernels/kernels.hpp"
#include "dapose/util/rng.hpp"

using namespace dapose;

namespace {

std::vector<double> random_vec(size_t n, util::Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool close(double a, double b, double rel, double abs_floor) {
  const double diff = std::fabs(a - b);
  return diff <= abs_floor + rel * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace

// Every SIMD backend available on this machine must agree with the scalar
// reference: bit-for-bit on elementwise kernels, to rounding on gemm and the
// reductions (FMA / lane accumulation reorder only).
TEST_CASE("simd variants match scalar reference") {
  const auto& ref = kernels::scalar_ops();
  util::Rng rng(42);

  for (auto backend : kernels::available_backends()) {
    if (backend == kernels::Backend::Scalar) continue;
    CAPTURE(kernels::backend_name(backend));
    const auto& ops = kernels::ops_for(backend);

    SUBCASE("gemm odd shapes") {
      for (size_t m : {1, 3, 8}) {
        for (size_t n : {1, 7, 33}) {
          for (size_t k : {1, 5, 64}) {
            auto a = random_vec(m * k, rng);
            auto b = random_vec(k * n, rng);
            std::vector<double> c_ref(m * n), c_simd(m * n);
            ref.gemm(m, n, k, a.data(), b.data(), c_ref.data(), false);
            ops.gemm(m, n, k, a.data(), b.data(), c_simd.data(), false);
            for (size_t i = 0; i < m * n; ++i) {
              REQUIRE(close(c_ref[i], c_simd[i], 1e-13, 1e-14));
            }
            // accumulate path
            auto c0 = random_vec(m * n, rng);
            auto c1 = c0;
            ref.gemm(m, n, k, a.data(), b.data(), c0.data(), true);
            ops.gemm(m, n, k, a.data(), b.data(), c1.data(), true);
            for (size_t i = 0; i < m * n; ++i) {
              REQUIRE(close(c0[i], c1[i], 1e-13, 1e-14));
            }
          }
        }
      }
    }

    SUBCASE("elementwise kernels bit-identical") {
      for (size_t n : {1, 7, 8, 9, 64, 67, 1023}) {
        auto x = random_vec(n, rng, -2.0, 2.0);
        auto y0 = random_vec(n, rng);
        auto y1 = y0;
        ref.axpy(n, 0.37, x.data(), y0.data());
        ops.axpy(n, 0.37, x.data(), y1.data());
        CHECK(y0 == y1);

        auto s0 = x, s1 = x;
        ref.scale(n, -1.25, s0.data());
        ops.scale(n, -1.25, s1.data());
        CHECK(s0 == s1);

        std::vector<double> r0(n), r1(n);
        ref.relu_fwd(n, x.data(), r0.data());
        ops.relu_fwd(n, x.data(), r1.data());
        CHECK(r0 == r1);

        auto dy = random_vec(n, rng);
        std::vector<double> dx0(n), dx1(n);
        ref.relu_bwd(n, x.data(), dy.data(), dx0.data());
        ops.relu_bwd(n, x.data(), dy.data(), dx1.data());
        CHECK(dx0 == dx1);

        std::vector<double> o0(n), o1(n);
        ref.scaled_diff(n, 2.5, x.data(), dy.data(), o0.data());
        ops.scaled_diff(n, 2.5, x.data(), dy.data(), o1.data());
        CHECK(o0 == o1);
      }
    }

    SUBCASE("bias kernels") {
      for (size_t hw : {1, 9, 64, 100}) {
        const size_t c = 5;
        auto bias = random_vec(c, rng);
        auto y0 = random_vec(c * hw, rng);
        auto y1 = y0;
        ref.add_bias(c, hw, bias.data(), y0.data());
        ops.add_bias(c, hw, bias.data(), y1.data());
        CHECK(y0 == y1);

        auto dy = random_vec(c * hw, rng);
        std::vector<double> g0(c, 0.1), g1(c, 0.1);
        ref.bias_grad(c, hw, dy.data(), g0.data());
        ops.bias_grad(c, hw, dy.data(), g1.data());
        for (size_t i = 0; i < c; ++i) REQUIRE(close(g0[i], g1[i], 1e-13, 1e-14));
      }
    }

    SUBCASE("sq_diff_sum") {
      for (size_t n : {1, 8, 77, 4096}) {
        auto a = random_vec(n, rng);
        auto b = random_vec(n, rng);
        const double s0 = ref.sq_diff_sum(n, a.data(), b.data());
        const double s1 = ops.sq_diff_sum(n, a.data(), b.data());
        REQUIRE(close(s0, s1, 1e-13, 1e-13));
      }
    }

    SUBCASE("adam_step bit-identical") {
      for (size_t n : {1, 8, 100}) {
        auto p0 = random_vec(n, rng);
        auto p1 = p0;
        auto g = random_vec(n, rng);
        auto m0 = random_vec(n, rng, -0.1, 0.1);
        auto m1 = m0;
        auto v0 = random_vec(n, rng, 0.0, 0.1);
        auto v1 = v0;
        ref.adam_step(n, p0.data(), g.data(), m0.data(), v0.data(), 1e-3, 0.9, 0.999, 1e-8,
                      0.1, 0.001999);
        ops.adam_step(n, p1.data(), g.data(), m1.data(), v1.data(), 1e-3, 0.9, 0.999, 1e-8,
                      0.1, 0.001999);
        CHECK(p0 == p1);
        CHECK(m0 == m1);
        CHECK(v0 == v1);
      }
    }
  }
}

TEST_CASE("gemm reference does what it says") {
  // 2x3 * 3x2 by hand
  const std::vector<double> a{1, 2, 3, 4, 5, 6};
  const std::vector<double> b{7, 8, 9, 10, 11, 12};
  std::vector<double> c(4);
  kernels::scalar_ops().gemm(2, 2, 3, a.data(), b.data(), c.data(), false);
  CHECK(c[0] == doctest::Approx(58));
  CHECK(c[1] == doctest::Approx(64));
  CHECK(c[2] == doctest::Approx(139));
  CHECK(c[3] == doctest::Approx(154));
}

TEST_CASE("dispatch reports an available backend") {
  const auto avail = kernels::available_backends();
  CHECK(!avail.empty());
  CHECK(avail.front() == kernels::Backend::Scalar);
  bool active_listed = false;
  for (auto b : avail) active_listed |= (b == kernels::active_backend());
  CHECK(active_listed);
}
