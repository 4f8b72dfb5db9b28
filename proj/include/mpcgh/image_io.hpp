#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpcgh/field.hpp"

namespace mpcgh {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interleaved 8-bit raster.
struct Image8 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t channels = 1;  // 1 (gray) or 3 (RGB)
  std::vector<std::uint8_t> pixels;

  std::uint8_t& at(std::size_t r, std::size_t c, std::size_t ch = 0) {
    return pixels[(r * cols + c) * channels + ch];
  }
  std::uint8_t at(std::size_t r, std::size_t c, std::size_t ch = 0) const {
    return pixels[(r * cols + c) * channels + ch];
  }
};

/// Reads an 8-bit gray or RGB PNG (alpha is dropped, palettes are expanded).
inline Image8 read_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("cannot read '" + path.string() + "': no such file");
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw IoError("cannot read PNG '" + path.string() + "': " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw IoError("'" + path.string() + "' has unsupported bit depth (16-bit); expected 8-bit");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image8 out;
  out.rows = image.height;
  out.cols = image.width;
  out.channels = color ? 3 : 1;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG '" + path.string() + "': " + msg);
  }
  return out;
}

inline void write_png(const std::filesystem::path& path, const Image8& img) {
  if (img.channels != 1 && img.channels != 3) throw IoError("write_png supports 1 or 3 channels");
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.cols);
  image.height = static_cast<png_uint_32>(img.rows);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

inline double from_u8(std::uint8_t v) { return static_cast<double>(v) / 255.0; }

/// One channel of an 8-bit image normalized to [0, 1].
inline RealGrid channel_grid(const Image8& img, std::size_t ch) {
  RealGrid g(img.rows, img.cols);
  for (std::size_t r = 0; r < img.rows; ++r)
    for (std::size_t c = 0; c < img.cols; ++c) g(r, c) = from_u8(img.at(r, c, ch));
  return g;
}

/// Gray PNG of `g` scaled so `scale_max` maps to 255.
inline Image8 to_gray8(const RealGrid& g, double scale_max) {
  Image8 img{g.rows(), g.cols(), 1, std::vector<std::uint8_t>(g.size())};
  const double s = scale_max > 0.0 ? 255.0 / scale_max : 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = std::floor(g[i] * s + 0.5);
    img.pixels[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return img;
}

}  // namespace mpcgh
