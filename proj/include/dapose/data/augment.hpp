#pragma once

#include <optional>

#include "dapose/core/types.hpp"
#include "dapose/data/heatmap.hpp"
#include "dapose/data/image_io.hpp"
#include "dapose/nn/tensor.hpp"
#include "dapose/util/rng.hpp"

namespace dapose::data {

// 2x3 affine, applied as [x', y']^T = A * [x, y, 1]^T.
struct Affine {
  double m[6] = {1, 0, 0, 0, 1, 0};

  static Affine identity() { return {}; }
  static Affine translation(double tx, double ty);
  static Affine rotation_deg(double deg);  // about the origin
  static Affine scaling(double sx, double sy);

  Affine then(const Affine& next) const;  // next ∘ this
  Affine inverse() const;
  void apply(double x, double y, double* ox, double* oy) const;
};

struct AugmentConfig {
  double max_rotation_deg = 0.0;
  double scale_min = 1.0;
  double scale_max = 1.0;
  double flip_prob = 0.0;
};

// Geometry applied to one sample: crop box (center, side lengths in source
// pixels) plus augmentation draw.
struct SampleTransform {
  double center_x = 0.0;
  double center_y = 0.0;
  double crop_w = 0.0;
  double crop_h = 0.0;
  double rotation_deg = 0.0;
  double scale = 1.0;
  bool flip = false;
};

// Crop geometry from a bbox: the box padded by `padding`, aspect matched to
// the input resolution. No augmentation.
SampleTransform crop_transform(const core::Box& bbox, int input_w, int input_h,
                               double padding = 1.25);

// Adds a rotation/scale/flip draw on top of the crop.
SampleTransform random_transform(const core::Box& bbox, int input_w, int input_h,
                                 const AugmentConfig& cfg, util::Rng& rng, double padding = 1.25);

// Source-image coordinates -> input coordinates (flip included).
Affine input_affine(const SampleTransform& t, int input_w, int input_h);

// Applies the affine to keypoints; flip also swaps left/right channels via
// flip_pairs. Keypoints leaving [0,input_w) x [0,input_h) get v = 0.
std::vector<core::Keypoint> transform_keypoints(const std::vector<core::Keypoint>& kps,
                                                const SampleTransform& t,
                                                const core::KeypointSchema& schema, int input_w,
                                                int input_h);

// Inverse-maps each output pixel, bilinear sampling with clamp-to-edge.
// Output normalized to intensity/255 - 0.5, laid out [3, H, W].
nn::Tensor warp_to_input(const ImageU8& src, const SampleTransform& t, int input_w, int input_h);

struct PipelineConfig {
  int input_w = 192;
  int input_h = 256;
  int output_stride = 4;
  double sigma_px = 2.0;
  AugmentConfig augment;
  double crop_padding = 1.25;
};

struct TrainingSample {
  nn::Tensor image;  // [3, H, W]
  HeatmapTensor target;
  std::vector<double> target_weights;
  core::DomainLabel domain = core::DomainLabel::Real;
  SampleTransform meta;
  std::vector<core::Keypoint> input_keypoints;  // keypoints in input coordinates
};

// Full sample assembly: crop/augment geometry, image warp, keypoint
// transform, heatmap targets. Pure given (image, annotation, transform).
TrainingSample make_training_sample(const ImageU8& img, const core::KeypointAnnotation& anno,
                                    const core::KeypointSchema& schema, const PipelineConfig& cfg,
                                    const SampleTransform& t);

}  // namespace dapose::data
