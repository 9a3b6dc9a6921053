#include "dapose/nn/optimizer.hpp"

#include <cmath>

#include "dapose/kernels/kernels.hpp"

namespace dapose::nn {

void Adam::step(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) {
    p->steps += 1;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(p->steps));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(p->steps));
    kernels::ops().adam_step(p->value.numel(), p->value.ptr(), p->grad.ptr(), p->m.ptr(),
                             p->v.ptr(), cfg_.lr, cfg_.beta1, cfg_.beta2, cfg_.eps, bc1, bc2);
  }
}

void Adam::zero_grad(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace dapose::nn
