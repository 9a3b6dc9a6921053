#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "dapose/kernels/kernels.hpp"

// AVX2 kernels, 4-wide double lanes. Elementwise ops use mul-then-add so the
// per-lane arithmetic matches the scalar reference bit-for-bit. gemm uses FMA
// (k-order accumulation per output element is the same as scalar, so results
// differ from the reference only by FMA rounding).

namespace dapose::kernels {
namespace {

void gemm_avx2(size_t m, size_t n, size_t k, const double* a, const double* b, double* c,
               bool accumulate) {
  if (!accumulate) {
    std::memset(c, 0, m * n * sizeof(double));
  }
  const size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t kk = 0; kk < k; ++kk) {
      const double aik_s = arow[kk];
      const __m256d aik = _mm256_set1_pd(aik_s);
      const double* brow = b + kk * n;
      size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d cj = _mm256_loadu_pd(crow + j);
        cj = _mm256_fmadd_pd(aik, _mm256_loadu_pd(brow + j), cj);
        _mm256_storeu_pd(crow + j, cj);
      }
      for (; j < n; ++j) {
        crow[j] = std::fma(aik_s, brow[j], crow[j]);
      }
    }
  }
}

void axpy_avx2(size_t n, double a, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(size_t n, double a, double* x) {
  const __m256d av = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

void relu_fwd_avx2(size_t n, const double* x, double* y) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_avx2(size_t n, const double* x, const double* dy, double* dx) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(dx + i, _mm256_and_pd(mask, _mm256_loadu_pd(dy + i)));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void add_bias_avx2(size_t channels, size_t hw, const double* bias, double* y) {
  for (size_t c = 0; c < channels; ++c) {
    const __m256d bv = _mm256_set1_pd(bias[c]);
    double* row = y + c * hw;
    size_t i = 0;
    for (; i + 4 <= hw; i += 4) {
      _mm256_storeu_pd(row + i, _mm256_add_pd(_mm256_loadu_pd(row + i), bv));
    }
    for (; i < hw; ++i) row[i] += bias[c];
  }
}

void bias_grad_avx2(size_t channels, size_t hw, const double* dy, double* gb) {
  // Lane accumulation; matches the scalar left-to-right sum to rounding.
  for (size_t c = 0; c < channels; ++c) {
    const double* row = dy + c * hw;
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= hw; i += 4) {
      acc = _mm256_add_pd(acc, _mm256_loadu_pd(row + i));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < hw; ++i) s += row[i];
    gb[c] += s;
  }
}

void scaled_diff_avx2(size_t n, double s, const double* a, const double* b, double* out) {
  const __m256d sv = _mm256_set1_pd(s);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(sv, d));
  }
  for (; i < n; ++i) out[i] = s * (a[i] - b[i]);
}

double sq_diff_sum_avx2(size_t n, const double* a, const double* b) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void adam_step_avx2(size_t n, double* p, const double* g, double* m, double* v, double lr,
                    double b1, double b2, double eps, double bc1, double bc2) {
  const __m256d b1v = _mm256_set1_pd(b1);
  const __m256d omb1 = _mm256_set1_pd(1.0 - b1);
  const __m256d b2v = _mm256_set1_pd(b2);
  const __m256d omb2 = _mm256_set1_pd(1.0 - b2);
  const __m256d lrv = _mm256_set1_pd(lr);
  const __m256d epsv = _mm256_set1_pd(eps);
  const __m256d bc1v = _mm256_set1_pd(bc1);
  const __m256d bc2v = _mm256_set1_pd(bc2);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    const __m256d mi =
        _mm256_add_pd(_mm256_mul_pd(b1v, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, gi));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2v, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(omb2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_div_pd(mi, bc1v);
    const __m256d vhat = _mm256_div_pd(vi, bc2v);
    const __m256d upd =
        _mm256_mul_pd(lrv, _mm256_div_pd(mhat, _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv)));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * (g[i] * g[i]);
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
  }
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops table{
      gemm_avx2,      axpy_avx2,        scale_avx2,       relu_fwd_avx2,
      relu_bwd_avx2,  add_bias_avx2,    bias_grad_avx2,   scaled_diff_avx2,
      sq_diff_sum_avx2, adam_step_avx2,
  };
  return table;
}

}  // namespace dapose::kernels

#endif  // x86-64
