#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace dapose::util {

using json = nlohmann::json;

// Parses a JSON file. Throws DataError carrying the byte offset on malformed
// input, DataError if the file cannot be opened.
json load_json(const std::filesystem::path& path);

// Writes text via a temp file in the same directory, then renames.
void atomic_write(const std::filesystem::path& path, const std::string& text);

void save_json_atomic(const std::filesystem::path& path, const json& j, int indent = 2);

// Canonical serialization: 0-indent dump with sorted keys (nlohmann objects
// are ordered maps, so dump() is already key-sorted). Basis for config hashing.
std::string canonical_dump(const json& j);

}  // namespace dapose::util
