#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dapose::core {

enum class DomainLabel : int { Real = 0, Synthetic = 1 };

inline const char* to_string(DomainLabel d) {
  return d == DomainLabel::Real ? "REAL" : "SYNTHETIC";
}
DomainLabel domain_from_string(const std::string& s);

// COCO visibility convention: 0 = unlabeled, 1 = labeled but occluded,
// 2 = labeled and visible. Only v > 0 joints enter losses and OKS.
struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  int v = 0;
};

struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

// Keypoint layout shared by annotations, heatmaps and the metric. Loaded from
// JSON ({"joint_names":[...], "flip_pairs":[[i,j],...], "oks_sigmas":[...],
// "parent":[...]}). oks_sigmas are the per-joint falloff constants k_i used
// directly in exp(-d^2 / (2 s^2 k_i^2)).
struct KeypointSchema {
  std::string name;
  std::vector<std::string> joint_names;
  std::vector<std::array<int, 2>> flip_pairs;
  std::vector<double> oks_sigmas;
  std::vector<int> parent;  // -1 marks the root

  int joint_count() const { return static_cast<int>(joint_names.size()); }
  int root() const;
  int index_of(const std::string& joint) const;  // -1 if absent

  // Enforces the schema invariants, throws util::DataError on violation.
  void check() const;

  static KeypointSchema from_json_file(const std::filesystem::path& path);
};

// One person instance.
struct KeypointAnnotation {
  int64_t image_id = 0;
  std::vector<Keypoint> keypoints;
  Box bbox;
  double area = 0.0;
  DomainLabel domain = DomainLabel::Real;
};

struct Violation {
  std::string field;
  std::string rule;
};

// Empty iff every annotation invariant holds against the schema and image
// size. Violations are data, not faults.
std::vector<Violation> validate_annotation(const KeypointAnnotation& a,
                                           const KeypointSchema& schema, int img_w, int img_h);

// Source-index per target joint; -1 marks a target joint with no source.
struct JointMap {
  std::string source_schema;
  std::string target_schema;
  std::vector<int> target_from_source;

  static JointMap from_json_file(const std::filesystem::path& path);
};

// Reorders keypoints from the source schema into the target schema's joint
// order. Absent targets become (0, 0, 0). Throws util::ConfigError if the map
// references an out-of-range source index.
std::vector<Keypoint> map_joints(const std::vector<Keypoint>& src, const JointMap& mapping);

// Inverse of map_joints over the mapped subset (unmapped source joints become
// (0,0,0)). source_count is the joint count of the original source schema.
std::vector<Keypoint> unmap_joints(const std::vector<Keypoint>& mapped, const JointMap& mapping,
                                   int source_count);

}  // namespace dapose::core
