#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "dapose/nn/layers.hpp"
#include "dapose/nn/tensor.hpp"

namespace dapose::model {

// Reference network: a 5-block stride-32 encoder (named res1..res5 so freeze
// configs written for ResNet-style backbones apply unchanged), a deconv pose
// head back up to stride 4, and a 3-FC domain classifier fed by global
// average pooling through a gradient reversal layer.
struct ModelConfig {
  int input_w = 192;
  int input_h = 256;
  int num_joints = 17;
  std::vector<int> encoder_channels = {16, 32, 64, 96, 128};  // res1..res5
  std::vector<int> head_channels = {64, 48, 32};              // deconv stages
  std::vector<int> domain_hidden = {256, 64};
  uint64_t init_seed = 0;

  int encoder_stride() const { return 1 << static_cast<int>(encoder_channels.size()); }
  int heatmap_stride() const {
    return encoder_stride() >> static_cast<int>(head_channels.size());
  }
};

enum class Stage { Init, Stage1, Stage2 };

const char* stage_name(Stage s);
Stage stage_from_string(const std::string& s);

class PoseModelBundle {
 public:
  struct FeatureCache {
    std::vector<nn::Conv2d::Cache> convs;
    std::vector<nn::ReLU::Cache> relus;
  };
  struct PoseCache {
    std::vector<nn::ConvTranspose2d::Cache> deconvs;
    std::vector<nn::ReLU::Cache> relus;
    nn::Conv2d::Cache final_conv;
  };
  struct DomainCache {
    nn::GlobalAvgPool::Cache gap;
    std::vector<nn::Linear::Cache> fcs;
    std::vector<nn::ReLU::Cache> relus;
  };

  explicit PoseModelBundle(const ModelConfig& cfg);

  // images [N, 3, H, W] -> features [N, C, H/32, W/32]. Throws on resolution
  // mismatch, naming expected and actual.
  nn::Tensor forward_features(const nn::Tensor& images, FeatureCache* cache = nullptr) const;
  // features -> heatmaps [N, K, H/4, W/4]
  nn::Tensor forward_pose(const nn::Tensor& features, PoseCache* cache = nullptr) const;
  // features -> one pre-sigmoid domain logit per sample [N]. Forward is
  // independent of lambda (the reversal layer is identity forward).
  nn::Tensor forward_domain(const nn::Tensor& features, DomainCache* cache = nullptr) const;

  // Accumulate pose-head gradients; returns d(loss)/d(features).
  nn::Tensor backward_pose(const nn::Tensor& dheatmaps, const PoseCache& cache);
  // Accumulate domain-head gradients. Returns d(loss)/d(features) through the
  // gradient reversal layer (scaled by -lambda) when into_features is true,
  // otherwise an empty tensor (classifier-only training).
  nn::Tensor backward_domain(const nn::Tensor& dlogits, const DomainCache& cache, double lambda,
                             bool into_features);
  // Accumulate extractor gradients from d(loss)/d(features).
  void backward_features(const nn::Tensor& dfeatures, const FeatureCache& cache);

  // Parameter blocks: res1..res5 (theta_f), "head" (theta_y), "domain" (theta_d).
  const std::vector<std::string>& block_names() const { return block_names_; }
  std::vector<nn::Parameter*> block_params(const std::string& block) const;
  std::vector<nn::Parameter*> all_params() const;
  std::vector<nn::Parameter*> trainable_params() const;

  // Stage semantics: Init/Stage1 train only the domain classifier; Stage2
  // trains the pose head plus encoder blocks not listed in frozen_blocks and
  // freezes the classifier. Unknown block names are a configuration error.
  void apply_freeze_mask(Stage stage, const std::vector<std::string>& frozen_blocks = {});
  bool is_frozen(const std::string& block) const;

  uint64_t block_checksum(const std::string& block) const;

  const ModelConfig& config() const { return cfg_; }

 private:
  ModelConfig cfg_;
  std::vector<std::string> block_names_;

  std::vector<nn::Conv2d> encoder_;  // one conv per res block
  std::vector<nn::ConvTranspose2d> head_deconvs_;
  std::unique_ptr<nn::Conv2d> head_final_;
  std::vector<nn::Linear> domain_fcs_;
  nn::ReLU relu_;
  nn::GlobalAvgPool gap_;
  nn::GradientReversal grl_;

  std::map<std::string, std::vector<nn::Parameter*>> blocks_;
  std::set<std::string> frozen_;
};

}  // namespace dapose::model
