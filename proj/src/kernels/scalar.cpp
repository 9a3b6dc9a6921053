#include <cmath>
#include <cstring>

#include "dapose/kernels/kernels.hpp"

// Reference kernels. Plain loops, mul-then-add (the build disables FMA
// contraction), k-order accumulation per output element matching the SIMD
// variants where bit-equality is claimed.

namespace dapose::kernels {
namespace {

void gemm_scalar(size_t m, size_t n, size_t k, const double* a, const double* b, double* c,
                 bool accumulate) {
  if (!accumulate) {
    std::memset(c, 0, m * n * sizeof(double));
  }
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t kk = 0; kk < k; ++kk) {
      const double aik = arow[kk];
      const double* brow = b + kk * n;
      for (size_t j = 0; j < n; ++j) {
        crow[j] += aik * brow[j];
      }
    }
  }
}

void axpy_scalar(size_t n, double a, const double* x, double* y) {
  for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(size_t n, double a, double* x) {
  for (size_t i = 0; i < n; ++i) x[i] *= a;
}

void relu_fwd_scalar(size_t n, const double* x, double* y) {
  for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_scalar(size_t n, const double* x, const double* dy, double* dx) {
  for (size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void add_bias_scalar(size_t channels, size_t hw, const double* bias, double* y) {
  for (size_t c = 0; c < channels; ++c) {
    const double b = bias[c];
    double* row = y + c * hw;
    for (size_t i = 0; i < hw; ++i) row[i] += b;
  }
}

void bias_grad_scalar(size_t channels, size_t hw, const double* dy, double* gb) {
  for (size_t c = 0; c < channels; ++c) {
    const double* row = dy + c * hw;
    double s = 0.0;
    for (size_t i = 0; i < hw; ++i) s += row[i];
    gb[c] += s;
  }
}

void scaled_diff_scalar(size_t n, double s, const double* a, const double* b, double* out) {
  for (size_t i = 0; i < n; ++i) out[i] = s * (a[i] - b[i]);
}

double sq_diff_sum_scalar(size_t n, const double* a, const double* b) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void adam_step_scalar(size_t n, double* p, const double* g, double* m, double* v, double lr,
                      double b1, double b2, double eps, double bc1, double bc2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * (g[i] * g[i]);
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table{
      gemm_scalar,      axpy_scalar,        scale_scalar,       relu_fwd_scalar,
      relu_bwd_scalar,  add_bias_scalar,    bias_grad_scalar,   scaled_diff_scalar,
      sq_diff_sum_scalar, adam_step_scalar,
  };
  return table;
}

}  // namespace dapose::kernels
