#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstring>

#include "dapose/kernels/kernels.hpp"

// NEON kernels, 2-wide double lanes (aarch64 only; 32-bit ARM NEON has no
// float64 vectors). Same contracts as the AVX2 variants: elementwise ops
// bit-match the scalar reference, gemm and reductions match to rounding.

namespace dapose::kernels {
namespace {

void gemm_neon(size_t m, size_t n, size_t k, const double* a, const double* b, double* c,
               bool accumulate) {
  if (!accumulate) {
    std::memset(c, 0, m * n * sizeof(double));
  }
  const size_t n2 = n & ~size_t(1);
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t kk = 0; kk < k; ++kk) {
      const double aik_s = arow[kk];
      const float64x2_t aik = vdupq_n_f64(aik_s);
      const double* brow = b + kk * n;
      size_t j = 0;
      for (; j < n2; j += 2) {
        float64x2_t cj = vld1q_f64(crow + j);
        cj = vfmaq_f64(cj, aik, vld1q_f64(brow + j));
        vst1q_f64(crow + j, cj);
      }
      for (; j < n; ++j) {
        crow[j] = std::fma(aik_s, brow[j], crow[j]);
      }
    }
  }
}

void axpy_neon(size_t n, double a, const double* x, double* y) {
  const float64x2_t av = vdupq_n_f64(a);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t prod = vmulq_f64(av, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(size_t n, double a, double* x) {
  const float64x2_t av = vdupq_n_f64(a);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(x + i, vmulq_f64(av, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

void relu_fwd_neon(size_t n, const double* x, double* y) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vmaxq_f64(vld1q_f64(x + i), zero));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_neon(size_t n, const double* x, const double* dy, double* dx) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t mask = vcgtq_f64(vld1q_f64(x + i), zero);
    const float64x2_t dyv = vld1q_f64(dy + i);
    vst1q_f64(dx + i, vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(dyv))));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void add_bias_neon(size_t channels, size_t hw, const double* bias, double* y) {
  for (size_t c = 0; c < channels; ++c) {
    const float64x2_t bv = vdupq_n_f64(bias[c]);
    double* row = y + c * hw;
    size_t i = 0;
    for (; i + 2 <= hw; i += 2) {
      vst1q_f64(row + i, vaddq_f64(vld1q_f64(row + i), bv));
    }
    for (; i < hw; ++i) row[i] += bias[c];
  }
}

void bias_grad_neon(size_t channels, size_t hw, const double* dy, double* gb) {
  for (size_t c = 0; c < channels; ++c) {
    const double* row = dy + c * hw;
    float64x2_t acc = vdupq_n_f64(0.0);
    size_t i = 0;
    for (; i + 2 <= hw; i += 2) {
      acc = vaddq_f64(acc, vld1q_f64(row + i));
    }
    double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < hw; ++i) s += row[i];
    gb[c] += s;
  }
}

void scaled_diff_neon(size_t n, double s, const double* a, const double* b, double* out) {
  const float64x2_t sv = vdupq_n_f64(s);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    vst1q_f64(out + i, vmulq_f64(sv, d));
  }
  for (; i < n; ++i) out[i] = s * (a[i] - b[i]);
}

double sq_diff_sum_neon(size_t n, const double* a, const double* b) {
  float64x2_t acc = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void adam_step_neon(size_t n, double* p, const double* g, double* m, double* v, double lr,
                    double b1, double b2, double eps, double bc1, double bc2) {
  const float64x2_t b1v = vdupq_n_f64(b1);
  const float64x2_t omb1 = vdupq_n_f64(1.0 - b1);
  const float64x2_t b2v = vdupq_n_f64(b2);
  const float64x2_t omb2 = vdupq_n_f64(1.0 - b2);
  const float64x2_t lrv = vdupq_n_f64(lr);
  const float64x2_t epsv = vdupq_n_f64(eps);
  const float64x2_t bc1v = vdupq_n_f64(bc1);
  const float64x2_t bc2v = vdupq_n_f64(bc2);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t gi = vld1q_f64(g + i);
    const float64x2_t mi = vaddq_f64(vmulq_f64(b1v, vld1q_f64(m + i)), vmulq_f64(omb1, gi));
    const float64x2_t vi =
        vaddq_f64(vmulq_f64(b2v, vld1q_f64(v + i)), vmulq_f64(omb2, vmulq_f64(gi, gi)));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    const float64x2_t mhat = vdivq_f64(mi, bc1v);
    const float64x2_t vhat = vdivq_f64(vi, bc2v);
    const float64x2_t upd = vmulq_f64(lrv, vdivq_f64(mhat, vaddq_f64(vsqrtq_f64(vhat), epsv)));
    vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), upd));
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

const Ops& neon_ops() {
  static const Ops table{
      gemm_neon,      axpy_neon,        scale_neon,       relu_fwd_neon,
      relu_bwd_neon,  add_bias_neon,    bias_grad_neon,   scaled_diff_neon,
      sq_diff_sum_neon, adam_step_neon,
  };
  return table;
}

}  // namespace dapose::kernels

#endif  // aarch64
