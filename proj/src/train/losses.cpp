#include "dapose/train/losses.hpp"

#include <cmath>

#include "dapose/kernels/kernels.hpp"
#include "dapose/util/errors.hpp"

namespace dapose::train {

namespace {

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

// -[d log f(s) + (1-d) log(1-f(s))] = max(s,0) - s*d + log(1 + exp(-|s|))
double bce_with_logit(double s, double d) {
  return std::max(s, 0.0) - s * d + std::log1p(std::exp(-std::fabs(s)));
}

void check_batch(size_t n_logits, size_t n_labels) {
  if (n_logits == 0) throw util::ConfigError("domain_loss: empty batch");
  if (n_logits != n_labels) throw util::ConfigError("domain_loss: logits/labels size mismatch");
}

}  // namespace

double domain_loss(const nn::Tensor& logits, const std::vector<core::DomainLabel>& labels) {
  check_batch(logits.numel(), labels.size());
  const size_t n = labels.size();
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    acc += bce_with_logit(logits.data[i], static_cast<double>(static_cast<int>(labels[i])));
  }
  return acc / static_cast<double>(n);
}

DomainLossGrad domain_loss_grad(const nn::Tensor& logits,
                                const std::vector<core::DomainLabel>& labels) {
  check_batch(logits.numel(), labels.size());
  const size_t n = labels.size();
  DomainLossGrad out{0.0, nn::Tensor({static_cast<int>(n)})};
  for (size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(static_cast<int>(labels[i]));
    out.value += bce_with_logit(logits.data[i], d);
    out.dlogits.data[i] = (sigmoid(logits.data[i]) - d) / static_cast<double>(n);
  }
  out.value /= static_cast<double>(n);
  return out;
}

namespace {

struct SampleMse {
  double mse = 0.0;       // mean over weighted elements
  size_t weighted = 0;    // number of weighted elements
};

SampleMse sample_mse(const nn::Tensor& pred, const nn::Tensor& target, size_t sample,
                     const std::vector<double>& weights) {
  const int k = pred.dim(1);
  const size_t hw = static_cast<size_t>(pred.dim(2)) * pred.dim(3);
  const double* p = pred.ptr() + sample * k * hw;
  const double* t = target.ptr() + sample * k * hw;
  SampleMse out;
  double sum = 0.0;
  for (int c = 0; c < k; ++c) {
    if (weights[static_cast<size_t>(c)] <= 0.0) continue;
    sum += kernels::ops().sq_diff_sum(hw, p + static_cast<size_t>(c) * hw,
                                      t + static_cast<size_t>(c) * hw);
    out.weighted += hw;
  }
  if (out.weighted > 0) out.mse = sum / static_cast<double>(out.weighted);
  return out;
}

void check_pose_shapes(const nn::Tensor& pred, const nn::Tensor& target, size_t n_weights,
                       size_t n_domains) {
  if (pred.ndim() != 4 || !pred.same_shape(target)) {
    throw util::ConfigError("pose_loss: prediction/target shape mismatch");
  }
  const auto n = static_cast<size_t>(pred.dim(0));
  if (n == 0 || n_weights != n || n_domains != n) {
    throw util::ConfigError("pose_loss: batch size mismatch");
  }
}

}  // namespace

double pose_loss(const nn::Tensor& pred, const nn::Tensor& target,
                 const std::vector<std::vector<double>>& channel_weights,
                 const std::vector<core::DomainLabel>& domains, double w_real) {
  check_pose_shapes(pred, target, channel_weights.size(), domains.size());
  const auto n = static_cast<size_t>(pred.dim(0));
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double scale = domains[i] == core::DomainLabel::Real ? w_real : 1.0;
    acc += scale * sample_mse(pred, target, i, channel_weights[i]).mse;
  }
  return acc / static_cast<double>(n);
}

PoseLossGrad pose_loss_grad(const nn::Tensor& pred, const nn::Tensor& target,
                            const std::vector<std::vector<double>>& channel_weights,
                            const std::vector<core::DomainLabel>& domains, double w_real) {
  check_pose_shapes(pred, target, channel_weights.size(), domains.size());
  const auto n = static_cast<size_t>(pred.dim(0));
  const int k = pred.dim(1);
  const size_t hw = static_cast<size_t>(pred.dim(2)) * pred.dim(3);

  PoseLossGrad out{0.0, nn::Tensor(pred.shape)};
  for (size_t i = 0; i < n; ++i) {
    const double scale = domains[i] == core::DomainLabel::Real ? w_real : 1.0;
    const auto mse = sample_mse(pred, target, i, channel_weights[i]);
    out.value += scale * mse.mse;
    if (mse.weighted == 0) continue;
    const double gscale =
        2.0 * scale / (static_cast<double>(n) * static_cast<double>(mse.weighted));
    for (int c = 0; c < k; ++c) {
      if (channel_weights[i][static_cast<size_t>(c)] <= 0.0) continue;
      const size_t off = (i * k + static_cast<size_t>(c)) * hw;
      kernels::ops().scaled_diff(hw, gscale, pred.ptr() + off, target.ptr() + off,
                                 out.dpred.ptr() + off);
    }
  }
  out.value /= static_cast<double>(n);
  return out;
}

}  // namespace dapose::train
