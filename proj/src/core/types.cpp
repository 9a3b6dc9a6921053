#include "dapose/core/types.hpp"

#include <set>
#include <sstream>

#include "dapose/util/errors.hpp"
#include "dapose/util/json_io.hpp"

namespace dapose::core {

using util::ConfigError;
using util::DataError;

DomainLabel domain_from_string(const std::string& s) {
  if (s == "REAL" || s == "real") return DomainLabel::Real;
  if (s == "SYNTHETIC" || s == "synthetic") return DomainLabel::Synthetic;
  throw ConfigError("unknown domain label: " + s);
}

int KeypointSchema::root() const {
  for (size_t i = 0; i < parent.size(); ++i) {
    if (parent[i] < 0) return static_cast<int>(i);
  }
  return -1;
}

int KeypointSchema::index_of(const std::string& joint) const {
  for (size_t i = 0; i < joint_names.size(); ++i) {
    if (joint_names[i] == joint) return static_cast<int>(i);
  }
  return -1;
}

void KeypointSchema::check() const {
  const int k = joint_count();
  if (k < 1) throw DataError("schema '" + name + "': joint count must be >= 1");
  if (static_cast<int>(oks_sigmas.size()) != k)
    throw DataError("schema '" + name + "': oks_sigmas size != joint count");
  if (static_cast<int>(parent.size()) != k)
    throw DataError("schema '" + name + "': parent size != joint count");
  for (double s : oks_sigmas) {
    if (!(s > 0.0)) throw DataError("schema '" + name + "': oks_sigmas must all be > 0");
  }
  int roots = 0;
  for (int i = 0; i < k; ++i) {
    if (parent[i] < 0) {
      ++roots;
    } else if (parent[i] >= k) {
      throw DataError("schema '" + name + "': parent index out of range");
    }
  }
  if (roots != 1) throw DataError("schema '" + name + "': expected exactly one root");
  std::set<int> seen;
  for (const auto& [a, b] : flip_pairs) {
    if (a < 0 || a >= k || b < 0 || b >= k || a == b)
      throw DataError("schema '" + name + "': bad flip pair");
    if (!seen.insert(a).second || !seen.insert(b).second)
      throw DataError("schema '" + name + "': flip pair indices must be distinct");
  }
}

KeypointSchema KeypointSchema::from_json_file(const std::filesystem::path& path) {
  const auto j = util::load_json(path);
  KeypointSchema s;
  s.name = j.value("name", path.stem().string());
  s.joint_names = j.at("joint_names").get<std::vector<std::string>>();
  for (const auto& p : j.at("flip_pairs")) {
    s.flip_pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
  }
  s.oks_sigmas = j.at("oks_sigmas").get<std::vector<double>>();
  s.parent = j.at("parent").get<std::vector<int>>();
  s.check();
  return s;
}

std::vector<Violation> validate_annotation(const KeypointAnnotation& a,
                                           const KeypointSchema& schema, int img_w, int img_h) {
  std::vector<Violation> out;
  const int k = schema.joint_count();
  if (static_cast<int>(a.keypoints.size()) != k) {
    std::ostringstream m;
    m << "expected " << k << " keypoints, got " << a.keypoints.size();
    out.push_back({"keypoints", m.str()});
    return out;  // further per-joint checks would be meaningless
  }
  for (int i = 0; i < k; ++i) {
    const auto& kp = a.keypoints[i];
    if (kp.v < 0 || kp.v > 2) {
      out.push_back({"keypoints[" + std::to_string(i) + "].v", "visibility must be in {0,1,2}"});
    }
    if (kp.v > 0 && (kp.x < 0.0 || kp.x >= img_w || kp.y < 0.0 || kp.y >= img_h)) {
      std::ostringstream m;
      m << schema.joint_names[i] << " at (" << kp.x << ", " << kp.y << ") outside image " << img_w
        << "x" << img_h;
      out.push_back({"keypoints[" + std::to_string(i) + "]", m.str()});
    }
  }
  if (!(a.area > 0.0)) out.push_back({"area", "must be > 0"});
  if (!(a.bbox.w > 0.0)) out.push_back({"bbox.w", "must be > 0"});
  if (!(a.bbox.h > 0.0)) out.push_back({"bbox.h", "must be > 0"});
  return out;
}

JointMap JointMap::from_json_file(const std::filesystem::path& path) {
  const auto j = util::load_json(path);
  JointMap m;
  m.source_schema = j.value("source_schema", "");
  m.target_schema = j.value("target_schema", "");
  m.target_from_source = j.at("target_from_source").get<std::vector<int>>();
  return m;
}

std::vector<Keypoint> map_joints(const std::vector<Keypoint>& src, const JointMap& mapping) {
  std::vector<Keypoint> out(mapping.target_from_source.size());
  for (size_t t = 0; t < mapping.target_from_source.size(); ++t) {
    const int s = mapping.target_from_source[t];
    if (s < 0) {
      out[t] = Keypoint{};  // absent: (0, 0, 0)
      continue;
    }
    if (s >= static_cast<int>(src.size())) {
      throw ConfigError("joint map references source index " + std::to_string(s) +
                        " but source has " + std::to_string(src.size()) + " joints");
    }
    out[t] = src[static_cast<size_t>(s)];
  }
  return out;
}

std::vector<Keypoint> unmap_joints(const std::vector<Keypoint>& mapped, const JointMap& mapping,
                                   int source_count) {
  if (mapped.size() != mapping.target_from_source.size()) {
    throw ConfigError("unmap_joints: keypoint count does not match joint map");
  }
  std::vector<Keypoint> out(static_cast<size_t>(source_count));
  for (size_t t = 0; t < mapping.target_from_source.size(); ++t) {
    const int s = mapping.target_from_source[t];
    if (s < 0) continue;
    if (s >= source_count) {
      throw ConfigError("joint map references source index " + std::to_string(s) +
                        " but source has " + std::to_string(source_count) + " joints");
    }
    out[static_cast<size_t>(s)] = mapped[t];
  }
  return out;
}

}  // namespace dapose::core
