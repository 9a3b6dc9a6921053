#pragma once

#include <memory>

#include "dapose/data/augment.hpp"
#include "dapose/data/dataset.hpp"

namespace dapose::data {

// Produces a TrainingSample per record. Samples are pure functions of
// (record index, stream seed), so any epoch of any run can be reproduced from
// its seeds alone; that is what makes interrupted runs resumable bit-exactly.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual size_t size() const = 0;
  virtual TrainingSample sample(size_t idx, uint64_t stream_seed) const = 0;
  virtual core::DomainLabel domain(size_t idx) const = 0;

  int count_real() const;
  int count_synthetic() const;
};

// Reads images from the paths in a DatasetIndex. Augmentation (when enabled)
// draws from an RNG derived from (stream_seed, idx).
class DiskSampleSource final : public SampleSource {
 public:
  DiskSampleSource(DatasetIndex index, core::KeypointSchema schema, PipelineConfig cfg,
                   bool augment_enabled);

  size_t size() const override { return index_.records.size(); }
  TrainingSample sample(size_t idx, uint64_t stream_seed) const override;
  core::DomainLabel domain(size_t idx) const override;

  const DatasetIndex& index() const { return index_; }
  const PipelineConfig& pipeline() const { return cfg_; }
  const core::KeypointSchema& schema() const { return schema_; }

 private:
  DatasetIndex index_;
  core::KeypointSchema schema_;
  PipelineConfig cfg_;
  bool augment_enabled_;
};

// In-memory variant for tests and generated-on-the-fly datasets.
class MemorySampleSource final : public SampleSource {
 public:
  MemorySampleSource(std::vector<std::pair<ImageU8, core::KeypointAnnotation>> items,
                     core::KeypointSchema schema, PipelineConfig cfg, bool augment_enabled);

  size_t size() const override { return items_.size(); }
  TrainingSample sample(size_t idx, uint64_t stream_seed) const override;
  core::DomainLabel domain(size_t idx) const override;

 private:
  std::vector<std::pair<ImageU8, core::KeypointAnnotation>> items_;
  core::KeypointSchema schema_;
  PipelineConfig cfg_;
  bool augment_enabled_;
};

// Stacks samples' images into one [B, 3, H, W] tensor.
nn::Tensor stack_images(const std::vector<TrainingSample>& samples);
// Stacks targets into [B, K, h, w].
nn::Tensor stack_targets(const std::vector<TrainingSample>& samples);

}  // namespace dapose::data
