#include "dapose/nn/layers.hpp"

#include <cstring>
#include <stdexcept>

#include "dapose/kernels/kernels.hpp"
#include "dapose/util/errors.hpp"
#include "dapose/util/rng.hpp"

namespace dapose::nn {

namespace {

void check_input(const Tensor& x, int ndim, int channels, const char* who) {
  if (x.ndim() != ndim || x.dim(1) != channels) {
    throw util::RuntimeFailure(std::string(who) + ": expected [N, " + std::to_string(channels) +
                               ", ...], got " + shape_str(x.shape));
  }
}

// [N, C, HW] <-> [C, N*HW] with sample-major column blocks.
void gather_batch(const double* x, int n, int c, int hw, double* xb) {
  for (int i = 0; i < n; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      std::memcpy(xb + (static_cast<size_t>(ch) * n + i) * hw,
                  x + (static_cast<size_t>(i) * c + ch) * hw, sizeof(double) * hw);
    }
  }
}

void scatter_batch(const double* xb, int n, int c, int hw, double* x) {
  for (int i = 0; i < n; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      std::memcpy(x + (static_cast<size_t>(i) * c + ch) * hw,
                  xb + (static_cast<size_t>(ch) * n + i) * hw, sizeof(double) * hw);
    }
  }
}

}  // namespace

void im2col(const double* src, int channels, int h, int w, int k, int stride, int pad,
            double* cols) {
  const int oh = conv_out_dim(h, k, stride, pad);
  const int ow = conv_out_dim(w, k, stride, pad);
  double* out = cols;
  for (int c = 0; c < channels; ++c) {
    const double* plane = src + static_cast<size_t>(c) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        for (int oy = 0; oy < oh; ++oy) {
          const int y = oy * stride - pad + ki;
          if (y < 0 || y >= h) {
            std::memset(out, 0, sizeof(double) * ow);
            out += ow;
            continue;
          }
          const double* row = plane + static_cast<size_t>(y) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int x = ox * stride - pad + kj;
            *out++ = (x >= 0 && x < w) ? row[x] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, int channels, int h, int w, int k, int stride, int pad,
            double* img) {
  const int oh = conv_out_dim(h, k, stride, pad);
  const int ow = conv_out_dim(w, k, stride, pad);
  const double* in = cols;
  for (int c = 0; c < channels; ++c) {
    double* plane = img + static_cast<size_t>(c) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        for (int oy = 0; oy < oh; ++oy) {
          const int y = oy * stride - pad + ki;
          if (y < 0 || y >= h) {
            in += ow;
            continue;
          }
          double* row = plane + static_cast<size_t>(y) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int x = ox * stride - pad + kj;
            if (x >= 0 && x < w) row[x] += in[ox];
          }
          in += ow;
        }
      }
    }
  }
}

void transpose(const double* src, int rows, int cols, double* dst) {
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      dst[static_cast<size_t>(j) * rows + i] = src[static_cast<size_t>(i) * cols + j];
    }
  }
}

void he_normal_init(Parameter& p, int fan_in, uint64_t seed) {
  util::Rng rng(util::derive_seed(seed, p.name));
  const double stddev = std::sqrt(2.0 / fan_in);
  for (auto& x : p.value.data) x = rng.normal(0.0, stddev);
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::string name, int in_ch, int out_ch, int k, int stride, int pad)
    : in_ch_(in_ch), out_ch_(out_ch), k_(k), stride_(stride), pad_(pad) {
  w_.name = name + ".w";
  w_.resize({out_ch, in_ch * k * k});
  b_.name = name + ".b";
  b_.resize({out_ch});
}

Tensor Conv2d::forward(const Tensor& x, Cache* cache) const {
  check_input(x, 4, in_ch_, "Conv2d");
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int oh = conv_out_dim(h, k_, stride_, pad_);
  const int ow = conv_out_dim(w, k_, stride_, pad_);
  const int ckk = in_ch_ * k_ * k_;
  const int ohw = oh * ow;

  Tensor cols({ckk, n * ohw});
  for (int i = 0; i < n; ++i) {
    // write sample i's columns into its column block: cols[:, i*ohw .. ]
    Tensor sample_cols({ckk, ohw});
    im2col(x.ptr() + static_cast<size_t>(i) * in_ch_ * h * w, in_ch_, h, w, k_, stride_, pad_,
           sample_cols.ptr());
    for (int r = 0; r < ckk; ++r) {
      std::memcpy(cols.ptr() + (static_cast<size_t>(r) * n + i) * ohw,
                  sample_cols.ptr() + static_cast<size_t>(r) * ohw, sizeof(double) * ohw);
    }
  }

  Tensor yb({out_ch_, n * ohw});
  kernels::ops().gemm(out_ch_, static_cast<size_t>(n) * ohw, ckk, w_.value.ptr(), cols.ptr(),
                      yb.ptr(), false);
  kernels::ops().add_bias(out_ch_, static_cast<size_t>(n) * ohw, b_.value.ptr(), yb.ptr());

  Tensor y({n, out_ch_, oh, ow});
  scatter_batch(yb.ptr(), n, out_ch_, ohw, y.ptr());

  if (cache) {
    cache->cols = std::move(cols);
    cache->in_shape = x.shape;
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& dy, const Cache& cache) {
  const int n = cache.in_shape[0], h = cache.in_shape[2], w = cache.in_shape[3];
  const int oh = dy.dim(2), ow = dy.dim(3);
  const int ckk = in_ch_ * k_ * k_;
  const int ohw = oh * ow;
  const size_t total_cols = static_cast<size_t>(n) * ohw;

  Tensor dyb({out_ch_, n * ohw});
  gather_batch(dy.ptr(), n, out_ch_, ohw, dyb.ptr());

  kernels::ops().bias_grad(out_ch_, total_cols, dyb.ptr(), b_.grad.ptr());

  Tensor cols_t({n * ohw, ckk});
  transpose(cache.cols.ptr(), ckk, n * ohw, cols_t.ptr());
  kernels::ops().gemm(out_ch_, ckk, total_cols, dyb.ptr(), cols_t.ptr(), w_.grad.ptr(), true);

  Tensor w_t({ckk, out_ch_});
  transpose(w_.value.ptr(), out_ch_, ckk, w_t.ptr());
  Tensor dcols({ckk, n * ohw});
  kernels::ops().gemm(ckk, total_cols, out_ch_, w_t.ptr(), dyb.ptr(), dcols.ptr(), false);

  Tensor dx({n, in_ch_, h, w});
  Tensor sample_cols({ckk, ohw});
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < ckk; ++r) {
      std::memcpy(sample_cols.ptr() + static_cast<size_t>(r) * ohw,
                  dcols.ptr() + (static_cast<size_t>(r) * n + i) * ohw, sizeof(double) * ohw);
    }
    col2im(sample_cols.ptr(), in_ch_, h, w, k_, stride_, pad_,
           dx.ptr() + static_cast<size_t>(i) * in_ch_ * h * w);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// ConvTranspose2d
//
// Forward is the adjoint of a Conv2d mapping the (larger) output grid back to
// the input grid: cols = W^T x, y = col2im(cols). Backward-data is that
// conv's forward; backward-weights pairs the input with im2col(dy).

ConvTranspose2d::ConvTranspose2d(std::string name, int in_ch, int out_ch, int k, int stride,
                                 int pad)
    : in_ch_(in_ch), out_ch_(out_ch), k_(k), stride_(stride), pad_(pad) {
  w_.name = name + ".w";
  w_.resize({in_ch, out_ch * k * k});
  b_.name = name + ".b";
  b_.resize({out_ch});
}

Tensor ConvTranspose2d::forward(const Tensor& x, Cache* cache) const {
  check_input(x, 4, in_ch_, "ConvTranspose2d");
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int oh = deconv_out_dim(h, k_, stride_, pad_);
  const int ow = deconv_out_dim(w, k_, stride_, pad_);
  const int okk = out_ch_ * k_ * k_;
  const int hw = h * w;

  Tensor xb({in_ch_, n * hw});
  gather_batch(x.ptr(), n, in_ch_, hw, xb.ptr());

  Tensor w_t({okk, in_ch_});
  transpose(w_.value.ptr(), in_ch_, okk, w_t.ptr());
  Tensor cols({okk, n * hw});
  kernels::ops().gemm(okk, static_cast<size_t>(n) * hw, in_ch_, w_t.ptr(), xb.ptr(), cols.ptr(),
                      false);

  Tensor y({n, out_ch_, oh, ow});
  Tensor sample_cols({okk, hw});
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < okk; ++r) {
      std::memcpy(sample_cols.ptr() + static_cast<size_t>(r) * hw,
                  cols.ptr() + (static_cast<size_t>(r) * n + i) * hw, sizeof(double) * hw);
    }
    col2im(sample_cols.ptr(), out_ch_, oh, ow, k_, stride_, pad_,
           y.ptr() + static_cast<size_t>(i) * out_ch_ * oh * ow);
    kernels::ops().add_bias(out_ch_, static_cast<size_t>(oh) * ow, b_.value.ptr(),
                            y.ptr() + static_cast<size_t>(i) * out_ch_ * oh * ow);
  }

  if (cache) {
    cache->input = x;
    cache->in_shape = x.shape;
  }
  return y;
}

Tensor ConvTranspose2d::backward(const Tensor& dy, const Cache& cache) {
  const int n = cache.in_shape[0], h = cache.in_shape[2], w = cache.in_shape[3];
  const int oh = dy.dim(2), ow = dy.dim(3);
  const int okk = out_ch_ * k_ * k_;
  const int hw = h * w;
  const size_t total_cols = static_cast<size_t>(n) * hw;

  // im2col of dy, batched into column blocks.
  Tensor dycols({okk, n * hw});
  Tensor sample_cols({okk, hw});
  for (int i = 0; i < n; ++i) {
    im2col(dy.ptr() + static_cast<size_t>(i) * out_ch_ * oh * ow, out_ch_, oh, ow, k_, stride_,
           pad_, sample_cols.ptr());
    for (int r = 0; r < okk; ++r) {
      std::memcpy(dycols.ptr() + (static_cast<size_t>(r) * n + i) * hw,
                  sample_cols.ptr() + static_cast<size_t>(r) * hw, sizeof(double) * hw);
    }
  }

  for (int i = 0; i < n; ++i) {
    kernels::ops().bias_grad(out_ch_, static_cast<size_t>(oh) * ow,
                             dy.ptr() + static_cast<size_t>(i) * out_ch_ * oh * ow, b_.grad.ptr());
  }

  // gW[in, okk] += xb[in, n*hw] * dycols^T[n*hw, okk]
  Tensor xb({in_ch_, n * hw});
  gather_batch(cache.input.ptr(), n, in_ch_, hw, xb.ptr());
  Tensor dycols_t({n * hw, okk});
  transpose(dycols.ptr(), okk, n * hw, dycols_t.ptr());
  kernels::ops().gemm(in_ch_, okk, total_cols, xb.ptr(), dycols_t.ptr(), w_.grad.ptr(), true);

  // dx[in, n*hw] = W[in, okk] * dycols[okk, n*hw]
  Tensor dxb({in_ch_, n * hw});
  kernels::ops().gemm(in_ch_, total_cols, okk, w_.value.ptr(), dycols.ptr(), dxb.ptr(), false);
  Tensor dx({n, in_ch_, h, w});
  scatter_batch(dxb.ptr(), n, in_ch_, hw, dx.ptr());
  return dx;
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(std::string name, int in_dim, int out_dim) : in_dim_(in_dim), out_dim_(out_dim) {
  w_.name = name + ".w";
  w_.resize({out_dim, in_dim});
  b_.name = name + ".b";
  b_.resize({out_dim});
}

Tensor Linear::forward(const Tensor& x, Cache* cache) const {
  if (x.ndim() != 2 || x.dim(1) != in_dim_) {
    throw util::RuntimeFailure("Linear: expected [N, " + std::to_string(in_dim_) + "], got " +
                               shape_str(x.shape));
  }
  const int n = x.dim(0);
  Tensor w_t({in_dim_, out_dim_});
  transpose(w_.value.ptr(), out_dim_, in_dim_, w_t.ptr());
  Tensor y({n, out_dim_});
  kernels::ops().gemm(n, out_dim_, in_dim_, x.ptr(), w_t.ptr(), y.ptr(), false);
  for (int i = 0; i < n; ++i) {
    kernels::ops().axpy(out_dim_, 1.0, b_.value.ptr(), y.ptr() + static_cast<size_t>(i) * out_dim_);
  }
  if (cache) cache->input = x;
  return y;
}

Tensor Linear::backward(const Tensor& dy, const Cache& cache) {
  const int n = dy.dim(0);
  Tensor dy_t({out_dim_, n});
  transpose(dy.ptr(), n, out_dim_, dy_t.ptr());
  kernels::ops().gemm(out_dim_, in_dim_, n, dy_t.ptr(), cache.input.ptr(), w_.grad.ptr(), true);
  kernels::ops().bias_grad(out_dim_, n, dy_t.ptr(), b_.grad.ptr());
  Tensor dx({n, in_dim_});
  kernels::ops().gemm(n, in_dim_, out_dim_, dy.ptr(), w_.value.ptr(), dx.ptr(), false);
  return dx;
}

// ---------------------------------------------------------------------------
// ReLU / GlobalAvgPool / GradientReversal

Tensor ReLU::forward(const Tensor& x, Cache* cache) const {
  Tensor y(x.shape);
  kernels::ops().relu_fwd(x.numel(), x.ptr(), y.ptr());
  if (cache) cache->output = y;
  return y;
}

Tensor ReLU::backward(const Tensor& dy, const Cache& cache) const {
  Tensor dx(dy.shape);
  kernels::ops().relu_bwd(dy.numel(), cache.output.ptr(), dy.ptr(), dx.ptr());
  return dx;
}

Tensor GlobalAvgPool::forward(const Tensor& x, Cache* cache) const {
  const int n = x.dim(0), c = x.dim(1);
  const int hw = x.dim(2) * x.dim(3);
  Tensor y({n, c});
  const double inv = 1.0 / static_cast<double>(hw);
  for (int i = 0; i < n; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      const double* plane = x.ptr() + (static_cast<size_t>(i) * c + ch) * hw;
      double s = 0.0;
      for (int j = 0; j < hw; ++j) s += plane[j];
      y.ptr()[static_cast<size_t>(i) * c + ch] = s * inv;
    }
  }
  if (cache) cache->in_shape = x.shape;
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy, const Cache& cache) const {
  const int n = cache.in_shape[0], c = cache.in_shape[1];
  const int hw = cache.in_shape[2] * cache.in_shape[3];
  Tensor dx({n, c, cache.in_shape[2], cache.in_shape[3]});
  const double inv = 1.0 / static_cast<double>(hw);
  for (int i = 0; i < n; ++i) {
    for (int ch = 0; ch < c; ++ch) {
      const double g = dy.ptr()[static_cast<size_t>(i) * c + ch] * inv;
      double* plane = dx.ptr() + (static_cast<size_t>(i) * c + ch) * hw;
      for (int j = 0; j < hw; ++j) plane[j] = g;
    }
  }
  return dx;
}

Tensor GradientReversal::backward(const Tensor& dy, double lambda) const {
  Tensor dx(dy.shape);
  for (size_t i = 0; i < dy.numel(); ++i) dx.ptr()[i] = -lambda * dy.ptr()[i];
  return dx;
}

}  // namespace dapose::nn
