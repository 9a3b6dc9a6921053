#include "dapose/data/augment.hpp"

#include <algorithm>
#include <cmath>

#include "dapose/util/errors.hpp"

namespace dapose::data {

Affine Affine::translation(double tx, double ty) {
  Affine a;
  a.m[2] = tx;
  a.m[5] = ty;
  return a;
}

Affine Affine::rotation_deg(double deg) {
  const double rad = deg * M_PI / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  Affine a;
  a.m[0] = c;
  a.m[1] = -s;
  a.m[3] = s;
  a.m[4] = c;
  return a;
}

Affine Affine::scaling(double sx, double sy) {
  Affine a;
  a.m[0] = sx;
  a.m[4] = sy;
  return a;
}

Affine Affine::then(const Affine& n) const {
  Affine r;
  r.m[0] = n.m[0] * m[0] + n.m[1] * m[3];
  r.m[1] = n.m[0] * m[1] + n.m[1] * m[4];
  r.m[2] = n.m[0] * m[2] + n.m[1] * m[5] + n.m[2];
  r.m[3] = n.m[3] * m[0] + n.m[4] * m[3];
  r.m[4] = n.m[3] * m[1] + n.m[4] * m[4];
  r.m[5] = n.m[3] * m[2] + n.m[4] * m[5] + n.m[5];
  return r;
}

Affine Affine::inverse() const {
  const double det = m[0] * m[4] - m[1] * m[3];
  if (std::fabs(det) < 1e-300) throw util::RuntimeFailure("singular affine");
  const double inv = 1.0 / det;
  Affine r;
  r.m[0] = m[4] * inv;
  r.m[1] = -m[1] * inv;
  r.m[3] = -m[3] * inv;
  r.m[4] = m[0] * inv;
  r.m[2] = -(r.m[0] * m[2] + r.m[1] * m[5]);
  r.m[5] = -(r.m[3] * m[2] + r.m[4] * m[5]);
  return r;
}

void Affine::apply(double x, double y, double* ox, double* oy) const {
  *ox = m[0] * x + m[1] * y + m[2];
  *oy = m[3] * x + m[4] * y + m[5];
}

SampleTransform crop_transform(const core::Box& bbox, int input_w, int input_h, double padding) {
  SampleTransform t;
  t.center_x = bbox.x + bbox.w / 2.0;
  t.center_y = bbox.y + bbox.h / 2.0;
  const double aspect = static_cast<double>(input_w) / input_h;
  double crop_w = bbox.w, crop_h = bbox.h;
  if (crop_w < aspect * crop_h) {
    crop_w = aspect * crop_h;
  } else {
    crop_h = crop_w / aspect;
  }
  t.crop_w = crop_w * padding;
  t.crop_h = crop_h * padding;
  return t;
}

SampleTransform random_transform(const core::Box& bbox, int input_w, int input_h,
                                 const AugmentConfig& cfg, util::Rng& rng, double padding) {
  if (cfg.scale_min > cfg.scale_max || cfg.scale_min <= 0.0) {
    throw util::ConfigError("augment scale range invalid");
  }
  if (cfg.max_rotation_deg < 0.0 || cfg.flip_prob < 0.0 || cfg.flip_prob > 1.0) {
    throw util::ConfigError("augment config invalid");
  }
  SampleTransform t = crop_transform(bbox, input_w, input_h, padding);
  t.rotation_deg = rng.uniform(-cfg.max_rotation_deg, cfg.max_rotation_deg);
  t.scale = rng.uniform(cfg.scale_min, cfg.scale_max);
  t.flip = rng.bernoulli(cfg.flip_prob);
  return t;
}

Affine input_affine(const SampleTransform& t, int input_w, int input_h) {
  // source -> centered -> rotated -> scaled to input -> recentered (-> flipped)
  Affine a = Affine::translation(-t.center_x, -t.center_y)
                 .then(Affine::rotation_deg(t.rotation_deg))
                 .then(Affine::scaling(t.scale * input_w / t.crop_w,
                                       t.scale * input_h / t.crop_h))
                 .then(Affine::translation(input_w / 2.0, input_h / 2.0));
  if (t.flip) {
    Affine flip;
    flip.m[0] = -1.0;
    flip.m[2] = input_w - 1.0;
    a = a.then(flip);
  }
  return a;
}

std::vector<core::Keypoint> transform_keypoints(const std::vector<core::Keypoint>& kps,
                                                const SampleTransform& t,
                                                const core::KeypointSchema& schema, int input_w,
                                                int input_h) {
  const Affine a = input_affine(t, input_w, input_h);
  std::vector<core::Keypoint> out(kps.size());
  for (size_t i = 0; i < kps.size(); ++i) {
    out[i] = kps[i];
    if (kps[i].v <= 0) continue;
    a.apply(kps[i].x, kps[i].y, &out[i].x, &out[i].y);
    if (out[i].x < 0.0 || out[i].x >= input_w || out[i].y < 0.0 || out[i].y >= input_h) {
      out[i].v = 0;  // left the crop
    }
  }
  if (t.flip) {
    for (const auto& [l, r] : schema.flip_pairs) {
      std::swap(out[static_cast<size_t>(l)], out[static_cast<size_t>(r)]);
    }
  }
  return out;
}

nn::Tensor warp_to_input(const ImageU8& src, const SampleTransform& t, int input_w, int input_h) {
  const Affine inv = input_affine(t, input_w, input_h).inverse();
  nn::Tensor out({3, input_h, input_w});
  const size_t plane = static_cast<size_t>(input_h) * input_w;
  for (int y = 0; y < input_h; ++y) {
    for (int x = 0; x < input_w; ++x) {
      double sx, sy;
      inv.apply(x, y, &sx, &sy);
      // clamp-to-edge bilinear
      sx = std::clamp(sx, 0.0, src.w - 1.0);
      sy = std::clamp(sy, 0.0, src.h - 1.0);
      const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, src.w - 1), y1 = std::min(y0 + 1, src.h - 1);
      const double fx = sx - x0, fy = sy - y0;
      for (int c = 0; c < 3; ++c) {
        const double v00 = src.pixel(x0, y0)[c], v10 = src.pixel(x1, y0)[c];
        const double v01 = src.pixel(x0, y1)[c], v11 = src.pixel(x1, y1)[c];
        const double v = v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) + v01 * (1 - fx) * fy +
                         v11 * fx * fy;
        out.ptr()[c * plane + static_cast<size_t>(y) * input_w + x] = v / 255.0 - 0.5;
      }
    }
  }
  return out;
}

TrainingSample make_training_sample(const ImageU8& img, const core::KeypointAnnotation& anno,
                                    const core::KeypointSchema& schema, const PipelineConfig& cfg,
                                    const SampleTransform& t) {
  TrainingSample s;
  s.meta = t;
  s.domain = anno.domain;
  s.image = warp_to_input(img, t, cfg.input_w, cfg.input_h);
  s.input_keypoints = transform_keypoints(anno.keypoints, t, schema, cfg.input_w, cfg.input_h);

  core::KeypointAnnotation transformed = anno;
  transformed.keypoints = s.input_keypoints;
  auto targets =
      make_heatmap_targets(transformed, cfg.input_h / cfg.output_stride,
                           cfg.input_w / cfg.output_stride, cfg.sigma_px, cfg.output_stride);
  s.target = std::move(targets.heatmaps);
  s.target_weights = std::move(targets.weights);
  return s;
}

}  // namespace dapose::data
