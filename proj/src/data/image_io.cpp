#include "dapose/data/image_io.hpp"

#include <fstream>

#include "dapose/util/errors.hpp"
#include "dapose/util/json_io.hpp"

namespace dapose::data {

using util::DataError;

ImageU8 read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image " + path.string());

  auto next_token = [&in, &path]() -> std::string {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw DataError("truncated PPM header in " + path.string());
  };

  if (next_token() != "P6") throw DataError(path.string() + ": not a binary PPM (P6)");
  ImageU8 img;
  img.w = std::stoi(next_token());
  img.h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (img.w <= 0 || img.h <= 0) throw DataError(path.string() + ": bad dimensions");
  if (maxval != 255) throw DataError(path.string() + ": only maxval 255 supported");
  in.get();  // single whitespace after maxval

  img.rgb.resize(static_cast<size_t>(img.w) * img.h * 3);
  in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.rgb.size())) {
    throw DataError(path.string() + ": truncated pixel data");
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const ImageU8& img) {
  std::string out = "P6\n" + std::to_string(img.w) + " " + std::to_string(img.h) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
  util::atomic_write(path, out);
}

}  // namespace dapose::data
