#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "dapose/core/types.hpp"

namespace dapose::eval {

struct Detection {
  int64_t image_id = 0;
  std::vector<std::array<double, 3>> keypoints;  // x, y, confidence
  double score = 0.0;
};

// Object keypoint similarity: mean over labeled (v > 0) gt joints of
// exp(-d^2 / (2 * area * k_i^2)). Returns nullopt when the gt has no labeled
// joint (undefined, deliberately not 0).
std::optional<double> oks(const Detection& det, const core::KeypointAnnotation& gt,
                          const std::vector<double>& sigmas);

// One scored detection after matching: TP iff it claimed an unmatched gt with
// OKS >= threshold, greedily in score order.
struct ScoredMatch {
  double score;
  bool tp;
};

struct ImageMatches {
  std::vector<ScoredMatch> detections;  // in score order
  std::vector<int> det_to_gt;           // same order; -1 for FP
  int n_gt = 0;                         // gts with at least one labeled joint
};

ImageMatches match_detections(const std::vector<Detection>& dets,
                              const std::vector<core::KeypointAnnotation>& gts,
                              const std::vector<double>& sigmas, double threshold);

// COCO-style 101-point interpolated AP over score-ranked detections pooled
// across images. nullopt when there are no ground-truth instances.
std::optional<double> average_precision(std::vector<ScoredMatch> all_matches, size_t n_gt);

struct EvalReport {
  std::vector<double> thresholds;        // 0.50 .. 0.95
  std::vector<double> ap_per_threshold;  // same order
  double map = 0.0;
  std::map<int, double> per_keypoint_mean_oks_term;  // joint index -> mean exp term
  size_t n_detections = 0;
  size_t n_ground_truth = 0;

  util::json to_json(const core::KeypointSchema& schema) const;
};

// AP at OKS thresholds {0.50, 0.55, ..., 0.95}; mAP is their mean. Detections
// and ground truth are grouped by image_id internally. Throws util::DataError
// when the ground truth is empty (undefined metric).
EvalReport map_over_thresholds(const std::vector<Detection>& dets,
                               const std::vector<core::KeypointAnnotation>& gts,
                               const std::vector<double>& sigmas);

// COCO results-format JSON ([{image_id, category_id, keypoints, score}, ...]).
std::vector<Detection> load_detections_json(const std::filesystem::path& path);
void write_detections_json(const std::filesystem::path& path,
                           const std::vector<Detection>& dets);

}  // namespace dapose::eval
