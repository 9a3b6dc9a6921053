#pragma once

#include <vector>

#include "dapose/core/types.hpp"
#include "dapose/nn/tensor.hpp"

namespace dapose::train {

// Binary cross entropy over pre-sigmoid logits, synthetic encoded as target 1.
// Computed in the log-sum-exp form, finite for any finite logit.
double domain_loss(const nn::Tensor& logits, const std::vector<core::DomainLabel>& labels);

// Loss plus d(loss)/d(logits).
struct DomainLossGrad {
  double value;
  nn::Tensor dlogits;
};
DomainLossGrad domain_loss_grad(const nn::Tensor& logits,
                                const std::vector<core::DomainLabel>& labels);

// Domain-scaled heatmap MSE: per sample, the mean squared error over the
// heatmap elements of weighted channels, scaled by w_real for real samples
// and 1 for synthetic, averaged over the batch. Samples with no weighted
// channel contribute 0.
double pose_loss(const nn::Tensor& pred, const nn::Tensor& target,
                 const std::vector<std::vector<double>>& channel_weights,
                 const std::vector<core::DomainLabel>& domains, double w_real);

struct PoseLossGrad {
  double value;
  nn::Tensor dpred;
};
PoseLossGrad pose_loss_grad(const nn::Tensor& pred, const nn::Tensor& target,
                            const std::vector<std::vector<double>>& channel_weights,
                            const std::vector<core::DomainLabel>& domains, double w_real);

// The adversarial objective value: pose term minus lambda times the domain
// term. The gradient routing realizing it lives in the training step (pose
// branch minimized directly, domain branch through the reversal layer).
inline double total_loss(double l_pose, double l_domain, double lambda) {
  return l_pose - lambda * l_domain;
}

}  // namespace dapose::train
