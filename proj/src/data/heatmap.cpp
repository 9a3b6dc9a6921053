#include "dapose/data/heatmap.hpp"

#include <cmath>

#include "dapose/util/errors.hpp"

namespace dapose::data {

HeatmapTargets make_heatmap_targets(const core::KeypointAnnotation& anno, int out_h, int out_w,
                                    double sigma_px, double stride) {
  if (!(sigma_px > 0.0)) throw util::ConfigError("heatmap sigma must be > 0");
  const int k = static_cast<int>(anno.keypoints.size());
  HeatmapTargets out;
  out.heatmaps.values = nn::Tensor({k, out_h, out_w});
  out.heatmaps.sigma_px = sigma_px;
  out.weights.assign(k, 0.0);

  const double inv2s2 = 1.0 / (2.0 * sigma_px * sigma_px);
  for (int i = 0; i < k; ++i) {
    const auto& kp = anno.keypoints[i];
    if (kp.v <= 0) continue;
    const auto qx = static_cast<long>(std::lround(kp.x / stride));
    const auto qy = static_cast<long>(std::lround(kp.y / stride));
    if (qx < 0 || qx >= out_w || qy < 0 || qy >= out_h) continue;  // channel stays zero
    out.weights[i] = 1.0;
    double* channel = out.heatmaps.values.ptr() + static_cast<size_t>(i) * out_h * out_w;
    for (int y = 0; y < out_h; ++y) {
      const double dy = y - static_cast<double>(qy);
      for (int x = 0; x < out_w; ++x) {
        const double dx = x - static_cast<double>(qx);
        channel[static_cast<size_t>(y) * out_w + x] = std::exp(-(dx * dx + dy * dy) * inv2s2);
      }
    }
  }
  return out;
}

PeakLocation decode_peak(const HeatmapTensor& hm, int channel) {
  const int h = hm.h(), w = hm.w();
  const double* values = hm.values.ptr() + static_cast<size_t>(channel) * h * w;
  int best = 0;
  for (int i = 1; i < h * w; ++i) {
    if (values[i] > values[best]) best = i;
  }
  const int by = best / w, bx = best % w;
  double x = bx, y = by;
  // Quarter-cell shift toward the larger horizontal/vertical neighbor.
  if (bx > 0 && bx < w - 1) {
    x += 0.25 * ((values[by * w + bx + 1] > values[by * w + bx - 1]) ? 1.0 : -1.0);
  }
  if (by > 0 && by < h - 1) {
    y += 0.25 * ((values[(by + 1) * w + bx] > values[(by - 1) * w + bx]) ? 1.0 : -1.0);
  }
  return {x, y, values[best]};
}

}  // namespace dapose::data
