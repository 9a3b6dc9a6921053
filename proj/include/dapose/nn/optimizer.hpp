#pragma once

#include <vector>

#include "dapose/nn/tensor.hpp"

namespace dapose::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment state lives on the Parameter, so checkpoints capture it and a
// parameter frozen mid-run resumes exactly where it stopped.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(const std::vector<Parameter*>& params);
  static void zero_grad(const std::vector<Parameter*>& params);

  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
};

}  // namespace dapose::nn
