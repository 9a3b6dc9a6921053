#include "dapose/data/dataset.hpp"

#include <map>

#include "dapose/util/errors.hpp"
#include "dapose/util/json_io.hpp"

namespace dapose::data {

using util::DataError;
using util::json;

void DatasetIndex::append(const DatasetIndex& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
  n_real += other.n_real;
  n_synthetic += other.n_synthetic;
}

DatasetIndex load_coco_json(const std::filesystem::path& annotation_file,
                            const std::filesystem::path& image_root, core::DomainLabel domain,
                            LoadReport* report) {
  const json j = util::load_json(annotation_file);

  struct ImageEntry {
    std::filesystem::path path;
    int w, h;
  };
  std::map<int64_t, ImageEntry> images;
  for (const auto& im : j.value("images", json::array())) {
    const auto id = im.at("id").get<int64_t>();
    images[id] = {image_root / im.at("file_name").get<std::string>(),
                  im.value("width", 0), im.value("height", 0)};
  }

  DatasetIndex index;
  for (const auto& ann : j.value("annotations", json::array())) {
    const int64_t ann_id = ann.value("id", int64_t{-1});
    if (!ann.contains("keypoints")) {
      throw DataError(annotation_file.string() + ": annotation " + std::to_string(ann_id) +
                      " missing 'keypoints'");
    }
    if (!ann.contains("image_id")) {
      throw DataError(annotation_file.string() + ": annotation " + std::to_string(ann_id) +
                      " missing 'image_id'");
    }
    const int64_t image_id = ann.at("image_id").get<int64_t>();
    const auto img_it = images.find(image_id);
    if (img_it == images.end()) {
      throw DataError(annotation_file.string() + ": annotation " + std::to_string(ann_id) +
                      " references unknown image " + std::to_string(image_id));
    }

    DatasetRecord rec;
    rec.image_path = img_it->second.path;
    rec.img_w = img_it->second.w;
    rec.img_h = img_it->second.h;
    rec.anno.image_id = image_id;
    rec.anno.domain = domain;

    const auto& kps = ann.at("keypoints");
    if (kps.size() % 3 != 0) {
      throw DataError(annotation_file.string() + ": annotation " + std::to_string(ann_id) +
                      " keypoints length not a multiple of 3");
    }
    for (size_t i = 0; i + 2 < kps.size(); i += 3) {
      rec.anno.keypoints.push_back(
          {kps[i].get<double>(), kps[i + 1].get<double>(), kps[i + 2].get<int>()});
    }
    const auto& bbox = ann.at("bbox");
    rec.anno.bbox = {bbox.at(0).get<double>(), bbox.at(1).get<double>(), bbox.at(2).get<double>(),
                     bbox.at(3).get<double>()};
    rec.anno.area = ann.value("area", rec.anno.bbox.w * rec.anno.bbox.h);

    if (!std::filesystem::exists(rec.image_path)) {
      if (report) {
        report->skipped.push_back({ann_id, rec.image_path.string(), "image file missing"});
      }
      continue;
    }

    if (domain == core::DomainLabel::Real) {
      ++index.n_real;
    } else {
      ++index.n_synthetic;
    }
    index.records.push_back(std::move(rec));
  }
  return index;
}

DatasetIndex load_manifest(const std::filesystem::path& manifest_path, LoadReport* report) {
  const json j = util::load_json(manifest_path);
  const auto base = manifest_path.parent_path();
  auto resolve = [&base](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  DatasetIndex merged;
  for (const auto& entry : j.at("datasets")) {
    const auto domain = core::domain_from_string(entry.at("domain").get<std::string>());
    merged.append(load_coco_json(resolve(entry.at("annotation_file").get<std::string>()),
                                 resolve(entry.at("image_root").get<std::string>()), domain,
                                 report));
  }
  return merged;
}

void write_coco_json(const std::filesystem::path& path,
                     const std::vector<DatasetRecord>& records,
                     const core::KeypointSchema& schema) {
  json images = json::array();
  json annotations = json::array();
  std::map<int64_t, bool> seen_image;
  int64_t ann_id = 1;
  for (const auto& rec : records) {
    if (!seen_image.count(rec.anno.image_id)) {
      seen_image[rec.anno.image_id] = true;
      images.push_back({{"id", rec.anno.image_id},
                        {"file_name", rec.image_path.filename().string()},
                        {"width", rec.img_w},
                        {"height", rec.img_h}});
    }
    json kps = json::array();
    int labeled = 0;
    for (const auto& kp : rec.anno.keypoints) {
      kps.push_back(kp.x);
      kps.push_back(kp.y);
      kps.push_back(kp.v);
      if (kp.v > 0) ++labeled;
    }
    annotations.push_back({{"id", ann_id++},
                           {"image_id", rec.anno.image_id},
                           {"category_id", 1},
                           {"keypoints", kps},
                           {"num_keypoints", labeled},
                           {"bbox", {rec.anno.bbox.x, rec.anno.bbox.y, rec.anno.bbox.w,
                                     rec.anno.bbox.h}},
                           {"area", rec.anno.area},
                           {"iscrowd", 0}});
  }
  json names = json::array();
  for (const auto& n : schema.joint_names) names.push_back(n);
  const json root = {{"images", images},
                     {"annotations", annotations},
                     {"categories", json::array({{{"id", 1},
                                                  {"name", "person"},
                                                  {"keypoints", names}}})}};
  util::save_json_atomic(path, root);
}

}  // namespace dapose::data
