#include "dapose/model/bundle.hpp"

#include <sstream>

#include "dapose/util/errors.hpp"
#include "dapose/util/rng.hpp"

namespace dapose::model {

using util::ConfigError;
using util::RuntimeFailure;

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Init:
      return "INIT";
    case Stage::Stage1:
      return "STAGE1";
    case Stage::Stage2:
      return "STAGE2";
  }
  return "?";
}

Stage stage_from_string(const std::string& s) {
  if (s == "INIT") return Stage::Init;
  if (s == "STAGE1") return Stage::Stage1;
  if (s == "STAGE2") return Stage::Stage2;
  throw ConfigError("unknown stage: " + s);
}

PoseModelBundle::PoseModelBundle(const ModelConfig& cfg) : cfg_(cfg) {
  if (cfg_.input_w % cfg_.encoder_stride() != 0 || cfg_.input_h % cfg_.encoder_stride() != 0) {
    throw ConfigError("input resolution must be divisible by the encoder stride " +
                      std::to_string(cfg_.encoder_stride()));
  }

  int in_ch = 3;
  for (size_t i = 0; i < cfg_.encoder_channels.size(); ++i) {
    const std::string block = "res" + std::to_string(i + 1);
    encoder_.emplace_back(block + ".conv", in_ch, cfg_.encoder_channels[i], 3, 2, 1);
    in_ch = cfg_.encoder_channels[i];
    block_names_.push_back(block);
  }

  int head_in = in_ch;
  for (size_t i = 0; i < cfg_.head_channels.size(); ++i) {
    head_deconvs_.emplace_back("head.deconv" + std::to_string(i), head_in, cfg_.head_channels[i],
                               4, 2, 1);
    head_in = cfg_.head_channels[i];
  }
  head_final_ = std::make_unique<nn::Conv2d>("head.final", head_in, cfg_.num_joints, 1, 1, 0);
  block_names_.push_back("head");

  int fc_in = in_ch;
  for (size_t i = 0; i < cfg_.domain_hidden.size(); ++i) {
    domain_fcs_.emplace_back("domain.fc" + std::to_string(i), fc_in, cfg_.domain_hidden[i]);
    fc_in = cfg_.domain_hidden[i];
  }
  domain_fcs_.emplace_back("domain.fc" + std::to_string(cfg_.domain_hidden.size()), fc_in, 1);
  block_names_.push_back("domain");

  for (size_t i = 0; i < encoder_.size(); ++i) {
    blocks_["res" + std::to_string(i + 1)] = encoder_[i].params();
  }
  auto& head = blocks_["head"];
  for (auto& d : head_deconvs_) {
    for (auto* p : d.params()) head.push_back(p);
  }
  for (auto* p : head_final_->params()) head.push_back(p);
  auto& dom = blocks_["domain"];
  for (auto& fc : domain_fcs_) {
    for (auto* p : fc.params()) dom.push_back(p);
  }

  // He init on weights (fan-in from the stored [out, in*k*k] / [out, in]
  // layout), zero biases, seeded by parameter name.
  for (auto* p : all_params()) {
    if (p->name.ends_with(".w")) {
      nn::he_normal_init(*p, p->value.dim(1), cfg_.init_seed);
    }
  }
}

nn::Tensor PoseModelBundle::forward_features(const nn::Tensor& images,
                                             FeatureCache* cache) const {
  if (images.ndim() != 4 || images.dim(1) != 3 || images.dim(2) != cfg_.input_h ||
      images.dim(3) != cfg_.input_w) {
    std::ostringstream msg;
    msg << "forward_features: expected [N, 3, " << cfg_.input_h << ", " << cfg_.input_w
        << "], got " << nn::shape_str(images.shape);
    throw RuntimeFailure(msg.str());
  }
  if (cache) {
    cache->convs.resize(encoder_.size());
    cache->relus.resize(encoder_.size());
  }
  nn::Tensor x = images;
  for (size_t i = 0; i < encoder_.size(); ++i) {
    x = encoder_[i].forward(x, cache ? &cache->convs[i] : nullptr);
    x = relu_.forward(x, cache ? &cache->relus[i] : nullptr);
  }
  return x;
}

nn::Tensor PoseModelBundle::forward_pose(const nn::Tensor& features, PoseCache* cache) const {
  if (cache) {
    cache->deconvs.resize(head_deconvs_.size());
    cache->relus.resize(head_deconvs_.size());
  }
  nn::Tensor x = features;
  for (size_t i = 0; i < head_deconvs_.size(); ++i) {
    x = head_deconvs_[i].forward(x, cache ? &cache->deconvs[i] : nullptr);
    x = relu_.forward(x, cache ? &cache->relus[i] : nullptr);
  }
  return head_final_->forward(x, cache ? &cache->final_conv : nullptr);
}

nn::Tensor PoseModelBundle::forward_domain(const nn::Tensor& features, DomainCache* cache) const {
  if (cache) {
    cache->fcs.resize(domain_fcs_.size());
    cache->relus.resize(domain_fcs_.size() - 1);
  }
  nn::Tensor x = gap_.forward(features, cache ? &cache->gap : nullptr);
  x = grl_.forward(x);
  for (size_t i = 0; i < domain_fcs_.size(); ++i) {
    x = domain_fcs_[i].forward(x, cache ? &cache->fcs[i] : nullptr);
    if (i + 1 < domain_fcs_.size()) {
      x = relu_.forward(x, cache ? &cache->relus[i] : nullptr);
    }
  }
  nn::Tensor logits({x.dim(0)});
  for (int i = 0; i < x.dim(0); ++i) logits.data[static_cast<size_t>(i)] = x.data[static_cast<size_t>(i)];
  return logits;
}

nn::Tensor PoseModelBundle::backward_pose(const nn::Tensor& dheatmaps, const PoseCache& cache) {
  nn::Tensor dx = head_final_->backward(dheatmaps, cache.final_conv);
  for (size_t i = head_deconvs_.size(); i-- > 0;) {
    dx = relu_.backward(dx, cache.relus[i]);
    dx = head_deconvs_[i].backward(dx, cache.deconvs[i]);
  }
  return dx;
}

nn::Tensor PoseModelBundle::backward_domain(const nn::Tensor& dlogits, const DomainCache& cache,
                                            double lambda, bool into_features) {
  nn::Tensor dx({dlogits.dim(0), 1});
  for (int i = 0; i < dlogits.dim(0); ++i) dx.data[static_cast<size_t>(i)] = dlogits.data[static_cast<size_t>(i)];
  for (size_t i = domain_fcs_.size(); i-- > 0;) {
    if (i + 1 < domain_fcs_.size()) {
      dx = relu_.backward(dx, cache.relus[i]);
    }
    dx = domain_fcs_[i].backward(dx, cache.fcs[i]);
  }
  if (!into_features) return {};
  dx = grl_.backward(dx, lambda);
  return gap_.backward(dx, cache.gap);
}

void PoseModelBundle::backward_features(const nn::Tensor& dfeatures, const FeatureCache& cache) {
  nn::Tensor dx = dfeatures;
  for (size_t i = encoder_.size(); i-- > 0;) {
    dx = relu_.backward(dx, cache.relus[i]);
    dx = encoder_[i].backward(dx, cache.convs[i]);
  }
}

std::vector<nn::Parameter*> PoseModelBundle::block_params(const std::string& block) const {
  const auto it = blocks_.find(block);
  if (it == blocks_.end()) throw ConfigError("unknown block name: " + block);
  return it->second;
}

std::vector<nn::Parameter*> PoseModelBundle::all_params() const {
  std::vector<nn::Parameter*> out;
  for (const auto& name : block_names_) {
    for (auto* p : blocks_.at(name)) out.push_back(p);
  }
  return out;
}

std::vector<nn::Parameter*> PoseModelBundle::trainable_params() const {
  std::vector<nn::Parameter*> out;
  for (const auto& name : block_names_) {
    if (frozen_.count(name)) continue;
    for (auto* p : blocks_.at(name)) out.push_back(p);
  }
  return out;
}

void PoseModelBundle::apply_freeze_mask(Stage stage,
                                        const std::vector<std::string>& frozen_blocks) {
  for (const auto& b : frozen_blocks) {
    if (blocks_.find(b) == blocks_.end()) throw ConfigError("unknown block name: " + b);
  }
  frozen_.clear();
  switch (stage) {
    case Stage::Init:
    case Stage::Stage1:
      for (const auto& name : block_names_) {
        if (name != "domain") frozen_.insert(name);
      }
      break;
    case Stage::Stage2:
      frozen_.insert("domain");
      for (const auto& b : frozen_blocks) frozen_.insert(b);
      break;
  }
}

bool PoseModelBundle::is_frozen(const std::string& block) const { return frozen_.count(block) > 0; }

uint64_t PoseModelBundle::block_checksum(const std::string& block) const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto* p : block_params(block)) {
    h = util::fnv1a64(p->value.data.data(), p->value.data.size() * sizeof(double), h);
  }
  return h;
}

}  // namespace dapose::model
