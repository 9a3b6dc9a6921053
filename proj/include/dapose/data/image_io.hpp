#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dapose::data {

// 8-bit RGB image, row-major, interleaved channels.
struct ImageU8 {
  int w = 0;
  int h = 0;
  std::vector<uint8_t> rgb;  // h * w * 3

  uint8_t* pixel(int x, int y) { return rgb.data() + (static_cast<size_t>(y) * w + x) * 3; }
  const uint8_t* pixel(int x, int y) const {
    return rgb.data() + (static_cast<size_t>(y) * w + x) * 3;
  }
};

// Binary PPM (P6, maxval 255). The only raster format this project reads or
// writes; the synthetic generator emits it and the loader consumes it.
ImageU8 read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const ImageU8& img);

}  // namespace dapose::data
