#include "dapose/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dapose/util/errors.hpp"
#include "dapose/util/json_io.hpp"

namespace dapose::eval {

using util::DataError;
using util::json;

std::optional<double> oks(const Detection& det, const core::KeypointAnnotation& gt,
                          const std::vector<double>& sigmas) {
  if (det.keypoints.size() != gt.keypoints.size() || sigmas.size() != gt.keypoints.size()) {
    throw DataError("oks: keypoint count mismatch");
  }
  const double s2 = gt.area;
  double sum = 0.0;
  int labeled = 0;
  for (size_t i = 0; i < gt.keypoints.size(); ++i) {
    if (gt.keypoints[i].v <= 0) continue;
    const double dx = det.keypoints[i][0] - gt.keypoints[i].x;
    const double dy = det.keypoints[i][1] - gt.keypoints[i].y;
    const double k = sigmas[i];
    sum += std::exp(-(dx * dx + dy * dy) / (2.0 * s2 * k * k));
    ++labeled;
  }
  if (labeled == 0) return std::nullopt;
  return sum / labeled;
}

ImageMatches match_detections(const std::vector<Detection>& dets,
                              const std::vector<core::KeypointAnnotation>& gts,
                              const std::vector<double>& sigmas, double threshold) {
  ImageMatches out;
  std::vector<bool> gt_eligible(gts.size(), false);
  for (size_t g = 0; g < gts.size(); ++g) {
    for (const auto& kp : gts[g].keypoints) {
      if (kp.v > 0) {
        gt_eligible[g] = true;
        break;
      }
    }
    out.n_gt += gt_eligible[g] ? 1 : 0;
  }

  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return dets[a].score > dets[b].score; });

  std::vector<bool> taken(gts.size(), false);
  for (size_t oi : order) {
    const auto& det = dets[oi];
    int best_gt = -1;
    double best_oks = -1.0;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (!gt_eligible[g] || taken[g]) continue;
      const auto v = oks(det, gts[g], sigmas);
      if (v && *v > best_oks) {
        best_oks = *v;
        best_gt = static_cast<int>(g);
      }
    }
    const bool tp = best_gt >= 0 && best_oks >= threshold;
    if (tp) taken[static_cast<size_t>(best_gt)] = true;
    out.detections.push_back({det.score, tp});
    out.det_to_gt.push_back(tp ? best_gt : -1);
  }
  return out;
}

std::optional<double> average_precision(std::vector<ScoredMatch> all_matches, size_t n_gt) {
  if (n_gt == 0) return std::nullopt;
  std::stable_sort(all_matches.begin(), all_matches.end(),
                   [](const ScoredMatch& a, const ScoredMatch& b) { return a.score > b.score; });
  std::vector<double> precision, recall;
  size_t tp = 0, fp = 0;
  for (const auto& m : all_matches) {
    (m.tp ? tp : fp) += 1;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
  }
  // Interpolated precision at 101 recall levels; running max from the right
  // makes p(r) = max precision at recall >= r.
  for (size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  for (int level = 0; level <= 100; ++level) {
    const double r = level / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r - 1e-12);
    if (it != recall.end()) {
      ap += precision[static_cast<size_t>(it - recall.begin())];
    }
  }
  return ap / 101.0;
}

EvalReport map_over_thresholds(const std::vector<Detection>& dets,
                               const std::vector<core::KeypointAnnotation>& gts,
                               const std::vector<double>& sigmas) {
  std::map<int64_t, std::vector<Detection>> dets_by_image;
  for (const auto& d : dets) dets_by_image[d.image_id].push_back(d);
  std::map<int64_t, std::vector<core::KeypointAnnotation>> gts_by_image;
  for (const auto& g : gts) gts_by_image[g.image_id].push_back(g);

  EvalReport report;
  report.n_detections = dets.size();

  size_t total_gt = 0;
  for (const auto& [image_id, image_gts] : gts_by_image) {
    for (const auto& g : image_gts) {
      for (const auto& kp : g.keypoints) {
        if (kp.v > 0) {
          ++total_gt;
          break;
        }
      }
    }
  }
  report.n_ground_truth = total_gt;
  if (total_gt == 0) throw DataError("map_over_thresholds: no labeled ground truth instances");

  for (int ti = 0; ti < 10; ++ti) {
    const double t = 0.50 + 0.05 * ti;
    report.thresholds.push_back(t);
    std::vector<ScoredMatch> pooled;
    for (const auto& [image_id, image_gts] : gts_by_image) {
      const auto dit = dets_by_image.find(image_id);
      const std::vector<Detection> empty;
      const auto matches =
          match_detections(dit == dets_by_image.end() ? empty : dit->second, image_gts, sigmas, t);
      pooled.insert(pooled.end(), matches.detections.begin(), matches.detections.end());
    }
    // Detections on images without any gt are unmatched by construction.
    for (const auto& [image_id, image_dets] : dets_by_image) {
      if (!gts_by_image.count(image_id)) {
        for (const auto& d : image_dets) pooled.push_back({d.score, false});
      }
    }
    const auto ap = average_precision(pooled, total_gt);
    report.ap_per_threshold.push_back(ap.value_or(0.0));
  }
  report.map = std::accumulate(report.ap_per_threshold.begin(), report.ap_per_threshold.end(),
                               0.0) /
               report.ap_per_threshold.size();

  // Per-joint mean OKS exp-terms over the matched pairs at the lowest
  // threshold; a diagnostic for which joints drag the score.
  std::map<int, double> term_sum;
  std::map<int, int> term_count;
  for (const auto& [image_id, image_gts] : gts_by_image) {
    const auto dit = dets_by_image.find(image_id);
    if (dit == dets_by_image.end()) continue;
    const auto matches = match_detections(dit->second, image_gts, sigmas, 0.5);
    std::vector<size_t> order(dit->second.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return dit->second[a].score > dit->second[b].score;
    });
    for (size_t i = 0; i < order.size(); ++i) {
      const int g = matches.det_to_gt[i];
      if (g < 0) continue;
      const auto& det = dit->second[order[i]];
      const auto& gt = image_gts[static_cast<size_t>(g)];
      for (size_t j = 0; j < gt.keypoints.size(); ++j) {
        if (gt.keypoints[j].v <= 0) continue;
        const double dx = det.keypoints[j][0] - gt.keypoints[j].x;
        const double dy = det.keypoints[j][1] - gt.keypoints[j].y;
        term_sum[static_cast<int>(j)] +=
            std::exp(-(dx * dx + dy * dy) / (2.0 * gt.area * sigmas[j] * sigmas[j]));
        term_count[static_cast<int>(j)] += 1;
      }
    }
  }
  for (const auto& [j, s] : term_sum) {
    report.per_keypoint_mean_oks_term[j] = s / term_count[j];
  }
  return report;
}

json EvalReport::to_json(const core::KeypointSchema& schema) const {
  json aps = json::object();
  for (size_t i = 0; i < thresholds.size(); ++i) {
    char key[8];
    std::snprintf(key, sizeof(key), "%.2f", thresholds[i]);
    aps[key] = ap_per_threshold[i];
  }
  json per_joint = json::object();
  for (const auto& [j, v] : per_keypoint_mean_oks_term) {
    per_joint[schema.joint_names[static_cast<size_t>(j)]] = v;
  }
  return {{"ap_per_threshold", aps},
          {"mAP", map},
          {"per_keypoint_mean_oks_term", per_joint},
          {"counts", {{"detections", n_detections}, {"ground_truth", n_ground_truth}}}};
}

std::vector<Detection> load_detections_json(const std::filesystem::path& path) {
  const json j = util::load_json(path);
  std::vector<Detection> out;
  for (const auto& e : j) {
    Detection d;
    d.image_id = e.at("image_id").get<int64_t>();
    d.score = e.at("score").get<double>();
    const auto& kps = e.at("keypoints");
    for (size_t i = 0; i + 2 < kps.size(); i += 3) {
      d.keypoints.push_back({kps[i].get<double>(), kps[i + 1].get<double>(),
                             kps[i + 2].get<double>()});
    }
    out.push_back(std::move(d));
  }
  return out;
}

void write_detections_json(const std::filesystem::path& path, const std::vector<Detection>& dets) {
  json arr = json::array();
  for (const auto& d : dets) {
    json kps = json::array();
    for (const auto& kp : d.keypoints) {
      kps.push_back(kp[0]);
      kps.push_back(kp[1]);
      kps.push_back(kp[2]);
    }
    arr.push_back(
        {{"image_id", d.image_id}, {"category_id", 1}, {"keypoints", kps}, {"score", d.score}});
  }
  util::save_json_atomic(path, arr);
}

}  // namespace dapose::eval
