#pragma once

#include <vector>

#include "dapose/core/types.hpp"
#include "dapose/nn/tensor.hpp"

namespace dapose::data {

// Per-keypoint target or prediction grids. Nonempty target channels peak at
// exactly 1.0 on the quantized keypoint cell.
struct HeatmapTensor {
  nn::Tensor values;  // [K, h, w]
  double sigma_px = 0.0;

  int joints() const { return values.dim(0); }
  int h() const { return values.dim(1); }
  int w() const { return values.dim(2); }
};

struct HeatmapTargets {
  HeatmapTensor heatmaps;
  std::vector<double> weights;  // K, 1 for labeled in-bounds keypoints else 0
};

// Gaussian targets: channel i is exp(-((x-qx)^2+(y-qy)^2)/(2 sigma^2)) around
// the quantized center (qx, qy) = round(keypoint / stride); zeros for v = 0 or
// centers landing outside the grid (weight 0 in both cases).
HeatmapTargets make_heatmap_targets(const core::KeypointAnnotation& anno, int out_h, int out_w,
                                    double sigma_px, double stride = 1.0);

// (x, y, peak value) of a channel's maximum, with quarter-cell refinement
// toward the stronger neighbor; standard heatmap decoding.
struct PeakLocation {
  double x, y, value;
};
PeakLocation decode_peak(const HeatmapTensor& hm, int channel);

}  // namespace dapose::data
