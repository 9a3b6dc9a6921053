#pragma once

#include <filesystem>
#include <string>

#include "dapose/model/bundle.hpp"
#include "dapose/util/json_io.hpp"

namespace dapose::model {

struct CheckpointMeta {
  std::string stage = "INIT";
  int64_t cycle = 0;
  std::string config_hash;
  std::string schema_name;
};

// Single-archive format: magic line, JSON header (metadata plus a tensor
// index keyed by parameter name), then raw little-endian float64 payload.
// Parameters are stored with their Adam state so a resumed run continues the
// exact optimizer trajectory. Writes are atomic (temp file + rename).
void save_checkpoint(const std::filesystem::path& path, const PoseModelBundle& bundle,
                     const CheckpointMeta& meta);

// Restores parameter values and optimizer state into an already-constructed
// bundle; shapes must match. Returns the stored metadata.
CheckpointMeta load_checkpoint(const std::filesystem::path& path, PoseModelBundle& bundle);

// Reads only the metadata header.
CheckpointMeta read_checkpoint_meta(const std::filesystem::path& path);

}  // namespace dapose::model
