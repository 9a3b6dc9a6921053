#include "dapose/data/source.hpp"

#include <cstring>

#include "dapose/util/errors.hpp"

namespace dapose::data {

namespace {

TrainingSample build(const ImageU8& img, const core::KeypointAnnotation& anno,
                     const core::KeypointSchema& schema, const PipelineConfig& cfg,
                     bool augment_enabled, size_t idx, uint64_t stream_seed) {
  SampleTransform t;
  if (augment_enabled) {
    util::Rng rng(util::derive_seed(stream_seed, "aug", idx));
    t = random_transform(anno.bbox, cfg.input_w, cfg.input_h, cfg.augment, rng, cfg.crop_padding);
  } else {
    t = crop_transform(anno.bbox, cfg.input_w, cfg.input_h, cfg.crop_padding);
  }
  return make_training_sample(img, anno, schema, cfg, t);
}

}  // namespace

int SampleSource::count_real() const {
  int n = 0;
  for (size_t i = 0; i < size(); ++i) n += domain(i) == core::DomainLabel::Real;
  return n;
}

int SampleSource::count_synthetic() const {
  return static_cast<int>(size()) - count_real();
}

DiskSampleSource::DiskSampleSource(DatasetIndex index, core::KeypointSchema schema,
                                   PipelineConfig cfg, bool augment_enabled)
    : index_(std::move(index)),
      schema_(std::move(schema)),
      cfg_(cfg),
      augment_enabled_(augment_enabled) {}

TrainingSample DiskSampleSource::sample(size_t idx, uint64_t stream_seed) const {
  const auto& rec = index_.records.at(idx);
  const ImageU8 img = read_ppm(rec.image_path);
  return build(img, rec.anno, schema_, cfg_, augment_enabled_, idx, stream_seed);
}

core::DomainLabel DiskSampleSource::domain(size_t idx) const {
  return index_.records.at(idx).anno.domain;
}

MemorySampleSource::MemorySampleSource(
    std::vector<std::pair<ImageU8, core::KeypointAnnotation>> items, core::KeypointSchema schema,
    PipelineConfig cfg, bool augment_enabled)
    : items_(std::move(items)),
      schema_(std::move(schema)),
      cfg_(cfg),
      augment_enabled_(augment_enabled) {}

TrainingSample MemorySampleSource::sample(size_t idx, uint64_t stream_seed) const {
  const auto& [img, anno] = items_.at(idx);
  return build(img, anno, schema_, cfg_, augment_enabled_, idx, stream_seed);
}

core::DomainLabel MemorySampleSource::domain(size_t idx) const {
  return items_.at(idx).second.domain;
}

nn::Tensor stack_images(const std::vector<TrainingSample>& samples) {
  if (samples.empty()) throw util::RuntimeFailure("stack_images: empty batch");
  const auto& s0 = samples.front().image;
  nn::Tensor out({static_cast<int>(samples.size()), s0.dim(0), s0.dim(1), s0.dim(2)});
  const size_t per = s0.numel();
  for (size_t i = 0; i < samples.size(); ++i) {
    std::memcpy(out.ptr() + i * per, samples[i].image.ptr(), per * sizeof(double));
  }
  return out;
}

nn::Tensor stack_targets(const std::vector<TrainingSample>& samples) {
  if (samples.empty()) throw util::RuntimeFailure("stack_targets: empty batch");
  const auto& t0 = samples.front().target.values;
  nn::Tensor out({static_cast<int>(samples.size()), t0.dim(0), t0.dim(1), t0.dim(2)});
  const size_t per = t0.numel();
  for (size_t i = 0; i < samples.size(); ++i) {
    std::memcpy(out.ptr() + i * per, samples[i].target.values.ptr(), per * sizeof(double));
  }
  return out;
}

}  // namespace dapose::data
