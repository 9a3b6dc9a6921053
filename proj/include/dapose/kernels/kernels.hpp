#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Data-parallel inner loops behind the tensor ops, double precision. Every
// kernel has a scalar reference implementation plus SIMD variants (AVX2 on
// x86-64, NEON on aarch64) selected at runtime. Elementwise kernels are
// bit-identical across variants (no FMA contraction); gemm and the reductions
// may differ by rounding only and are equivalence-tested against the scalar
// reference.

namespace dapose::kernels {

struct Ops {
  // C[M x N] (+)= A[M x K] * B[K x N], row-major, contiguous.
  void (*gemm)(size_t m, size_t n, size_t k, const double* a, const double* b, double* c,
               bool accumulate);
  // y[i] += a * x[i]
  void (*axpy)(size_t n, double a, const double* x, double* y);
  // x[i] *= a
  void (*scale)(size_t n, double a, double* x);
  // y[i] = max(x[i], 0)
  void (*relu_fwd)(size_t n, const double* x, double* y);
  // dx[i] = x[i] > 0 ? dy[i] : 0
  void (*relu_bwd)(size_t n, const double* x, const double* dy, double* dx);
  // y laid out [C x HW]; y[c][i] += bias[c]
  void (*add_bias)(size_t channels, size_t hw, const double* bias, double* y);
  // gb[c] += sum_i dy[c][i]
  void (*bias_grad)(size_t channels, size_t hw, const double* dy, double* gb);
  // out[i] = s * (a[i] - b[i])
  void (*scaled_diff)(size_t n, double s, const double* a, const double* b, double* out);
  // sum_i (a[i] - b[i])^2
  double (*sq_diff_sum)(size_t n, const double* a, const double* b);
  // Adam update with precomputed bias corrections bc1 = 1-b1^t, bc2 = 1-b2^t.
  void (*adam_step)(size_t n, double* p, const double* g, double* m, double* v, double lr,
                    double b1, double b2, double eps, double bc1, double bc2);
};

enum class Backend { Scalar, Avx2, Neon };

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

// Table for a backend; throws util::ConfigError if it is not usable here.
const Ops& ops_for(Backend b);

// Active table. Resolved once: best supported backend, overridable via the
// DAPOSE_KERNELS environment variable (scalar|avx2|neon|auto).
const Ops& ops();

Backend active_backend();
std::string backend_name(Backend b);

// Backends usable on this machine (always includes Scalar).
std::vector<Backend> available_backends();

// Test hook: force a backend. Throws util::ConfigError if unavailable.
void force_backend(Backend b);

}  // namespace dapose::kernels
