#include "dapose/util/json_io.hpp"

#include <fstream>
#include <sstream>

#include "dapose/util/errors.hpp"

namespace dapose::util {

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << path.string() << ": parse error at byte " << e.byte << ": " << e.what();
    throw DataError(msg.str());
  }
}

void atomic_write(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DataError("cannot write " + tmp.string());
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
      throw DataError("short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void save_json_atomic(const std::filesystem::path& path, const json& j, int indent) {
  atomic_write(path, j.dump(indent) + "\n");
}

std::string canonical_dump(const json& j) { return j.dump(); }

}  // namespace dapose::util
