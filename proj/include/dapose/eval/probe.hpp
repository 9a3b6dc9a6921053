#pragma once

#include <filesystem>
#include <vector>

#include "dapose/core/types.hpp"
#include "dapose/data/source.hpp"
#include "dapose/eval/metrics.hpp"
#include "dapose/model/bundle.hpp"

namespace dapose::eval {

struct FeatureMatrix {
  nn::Tensor values;  // [N, C] pooled extractor features
  std::vector<core::DomainLabel> labels;
  std::vector<int64_t> image_ids;
};

// Pooled (global-average) extractor features for every sample, inference
// mode, deterministic.
FeatureMatrix extract_pooled_features(const model::PoseModelBundle& bundle,
                                      const data::SampleSource& source, int batch = 32);

// CSV with header: image_id,domain,f0,...,f{C-1}.
void export_features_csv(const std::filesystem::path& path, const FeatureMatrix& features);

struct ProbeConfig {
  double train_frac = 0.7;
  int epochs = 150;
  int batch = 32;
  double lr = 0.01;
  uint64_t seed = 0;
  std::vector<int> hidden = {256, 64};  // mirror the domain head
};

// Held-out accuracy of a freshly trained 3-FC probe on frozen features; the
// quantitative stand-in for eyeballing embedding plots. Near the majority
// class prior means the domains are not separable in feature space. Throws
// util::DataError if only one domain is present.
double domain_confusion_score(const FeatureMatrix& features, const ProbeConfig& cfg);

// Convenience: extract features from images, then probe.
double domain_confusion_score(const model::PoseModelBundle& bundle,
                              const data::SampleSource& source, const ProbeConfig& cfg);

// Heatmap decode over a dataset with ground-truth boxes: peak + quarter-cell
// refinement per joint, mapped back through the inverse crop transform.
// Detection score is the mean peak confidence.
std::vector<Detection> run_detections(const model::PoseModelBundle& bundle,
                                      const data::SampleSource& source, int batch = 32);

}  // namespace dapose::eval
