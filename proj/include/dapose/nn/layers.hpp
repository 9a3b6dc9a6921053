#pragma once

#include <string>
#include <vector>

#include "dapose/nn/tensor.hpp"

// Fixed-topology layers with explicit forward/backward. Forward passes are
// const; training callers pass a Cache that backward consumes. Backward
// accumulates into parameter gradients and returns the input gradient.

namespace dapose::nn {

// cols[(c*k+ki)*k+kj][oy*ow+ox] = src[c][oy*s - p + ki][ox*s - p + kj], 0 outside.
void im2col(const double* src, int channels, int h, int w, int k, int stride, int pad, double* cols);
// Adjoint of im2col: accumulates cols back into the image.
void col2im(const double* cols, int channels, int h, int w, int k, int stride, int pad, double* img);
// dst[j][i] = src[i][j] for src[rows x cols].
void transpose(const double* src, int rows, int cols, double* dst);

inline int conv_out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}
inline int deconv_out_dim(int in, int k, int stride, int pad) {
  return (in - 1) * stride - 2 * pad + k;
}

class Conv2d {
 public:
  struct Cache {
    Tensor cols;  // [CKK, N*OH*OW], sample-major column blocks
    std::vector<int> in_shape;
  };

  Conv2d(std::string name, int in_ch, int out_ch, int k, int stride, int pad);

  // x [N, in, H, W] -> [N, out, OH, OW]
  Tensor forward(const Tensor& x, Cache* cache = nullptr) const;
  Tensor backward(const Tensor& dy, const Cache& cache);

  std::vector<Parameter*> params() { return {&w_, &b_}; }
  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }

 private:
  int in_ch_, out_ch_, k_, stride_, pad_;
  Parameter w_;  // [out, in*k*k]
  Parameter b_;  // [out]
};

// Transposed convolution; geometry fixed to the deconvolution the pose head
// uses (output = input * stride for k = 2*stride, pad = stride/2).
class ConvTranspose2d {
 public:
  struct Cache {
    Tensor input;  // [N, in, H, W]
    std::vector<int> in_shape;
  };

  ConvTranspose2d(std::string name, int in_ch, int out_ch, int k, int stride, int pad);

  // x [N, in, H, W] -> [N, out, OH, OW]
  Tensor forward(const Tensor& x, Cache* cache = nullptr) const;
  Tensor backward(const Tensor& dy, const Cache& cache);

  std::vector<Parameter*> params() { return {&w_, &b_}; }

 private:
  int in_ch_, out_ch_, k_, stride_, pad_;
  Parameter w_;  // [in, out*k*k]
  Parameter b_;  // [out]
};

class Linear {
 public:
  struct Cache {
    Tensor input;  // [N, in]
  };

  Linear(std::string name, int in_dim, int out_dim);

  // x [N, in] -> [N, out]
  Tensor forward(const Tensor& x, Cache* cache = nullptr) const;
  Tensor backward(const Tensor& dy, const Cache& cache);

  std::vector<Parameter*> params() { return {&w_, &b_}; }

 private:
  int in_dim_, out_dim_;
  Parameter w_;  // [out, in]
  Parameter b_;  // [out]
};

class ReLU {
 public:
  struct Cache {
    Tensor output;
  };

  Tensor forward(const Tensor& x, Cache* cache = nullptr) const;
  Tensor backward(const Tensor& dy, const Cache& cache) const;
};

// [N, C, H, W] -> [N, C], mean over spatial positions.
class GlobalAvgPool {
 public:
  struct Cache {
    std::vector<int> in_shape;
  };

  Tensor forward(const Tensor& x, Cache* cache = nullptr) const;
  Tensor backward(const Tensor& dy, const Cache& cache) const;
};

// Identity forward; backward multiplies the gradient by -lambda.
class GradientReversal {
 public:
  Tensor forward(const Tensor& x) const { return x; }
  Tensor backward(const Tensor& dy, double lambda) const;
};

// He-normal fan-in init, seeded from (seed, parameter name) so initialization
// is independent of construction order and of which other modules exist.
void he_normal_init(Parameter& p, int fan_in, uint64_t seed);

}  // namespace dapose::nn
