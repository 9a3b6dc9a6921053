#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dapose/core/types.hpp"

namespace dapose::data {

struct DatasetRecord {
  std::filesystem::path image_path;
  int img_w = 0;
  int img_h = 0;
  core::KeypointAnnotation anno;
};

struct DatasetIndex {
  std::vector<DatasetRecord> records;
  int n_real = 0;
  int n_synthetic = 0;

  void append(const DatasetIndex& other);
};

// Records that were skipped at load time (missing image files).
struct LoadReport {
  struct Skipped {
    int64_t annotation_id;
    std::string path;
    std::string reason;
  };
  std::vector<Skipped> skipped;
};

// COCO-format keypoint annotations; one record per person instance, the given
// domain applied to every record from this file. Malformed JSON raises
// util::DataError with a byte offset; instances missing required fields raise
// util::DataError naming the instance id; missing image files are skipped and
// listed in the report.
DatasetIndex load_coco_json(const std::filesystem::path& annotation_file,
                            const std::filesystem::path& image_root, core::DomainLabel domain,
                            LoadReport* report = nullptr);

// Manifest: {"datasets": [{"annotation_file": ..., "image_root": ..., "domain": ...}, ...]}.
// Relative paths resolve against the manifest's directory.
DatasetIndex load_manifest(const std::filesystem::path& manifest_path,
                           LoadReport* report = nullptr);

// COCO-format writer used by the synthetic generator and tests. Image entries
// are derived from the records (file_name relative to the annotation file's
// intended image_root).
void write_coco_json(const std::filesystem::path& path,
                     const std::vector<DatasetRecord>& records,
                     const core::KeypointSchema& schema);

}  // namespace dapose::data
