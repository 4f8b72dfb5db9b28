#pragma once

#include <filesystem>
#include <string>

#include "mpcgh/image_io.hpp"
#include "mpcgh/targeting.hpp"

namespace mpcgh {

/// Loads an 8-bit gray/RGB image and an 8-bit gray depth map of the same size.
inline RgbdScene load_scene(const std::filesystem::path& image_path,
                            const std::filesystem::path& depth_path) {
  const Image8 image = read_png(image_path);
  const Image8 depth = read_png(depth_path);
  if (depth.channels != 1) {
    throw IoError("depth map '" + depth_path.string() + "' must be single-channel grayscale");
  }
  if (image.rows != depth.rows || image.cols != depth.cols) {
    throw IoError("image '" + image_path.string() + "' is " + shape_string(image.rows, image.cols) +
                  " but depth '" + depth_path.string() + "' is " +
                  shape_string(depth.rows, depth.cols));
  }
  RgbdScene scene;
  for (std::size_t ch = 0; ch < image.channels; ++ch) scene.channels.push_back(channel_grid(image, ch));
  scene.depth = channel_grid(depth, 0);
  return scene;
}

/// Three flat rectangles at depths 0.1, 0.5 and 0.9 on a black background at depth 0.9.
inline RgbdScene three_rectangle_scene(std::size_t rows = 256, std::size_t cols = 256) {
  RealGrid image(rows, cols, 0.0), depth(rows, cols, 0.9);
  struct Rect {
    double r0, r1, c0, c1, value, depth;
  };
  // Layout in units of a 256x256 frame.
  const Rect rects[] = {{40, 110, 30, 100, 1.0, 0.1},
                        {120, 200, 60, 140, 0.8, 0.5},
                        {60, 150, 150, 230, 0.6, 0.9}};
  const double sr = static_cast<double>(rows) / 256.0, sc = static_cast<double>(cols) / 256.0;
  for (const Rect& rc : rects) {
    const auto r0 = static_cast<std::size_t>(rc.r0 * sr), r1 = static_cast<std::size_t>(rc.r1 * sr);
    const auto c0 = static_cast<std::size_t>(rc.c0 * sc), c1 = static_cast<std::size_t>(rc.c1 * sc);
    for (std::size_t r = r0; r < r1 && r < rows; ++r)
      for (std::size_t c = c0; c < c1 && c < cols; ++c) {
        image(r, c) = rc.value;
        depth(r, c) = rc.depth;
      }
  }
  RgbdScene scene;
  scene.channels.push_back(std::move(image));
  scene.depth = std::move(depth);
  return scene;
}

/// Writes a scene as 8-bit PNGs (gray or RGB image, gray depth).
inline void save_scene(const RgbdScene& scene, const std::filesystem::path& image_path,
                       const std::filesystem::path& depth_path) {
  scene.validate();
  const std::size_t ch = scene.channels.size();
  if (ch != 1 && ch != 3) throw IoError("scene must have 1 or 3 channels to be saved");
  Image8 img{scene.rows(), scene.cols(), ch, std::vector<std::uint8_t>(scene.rows() * scene.cols() * ch)};
  for (std::size_t r = 0; r < scene.rows(); ++r)
    for (std::size_t c = 0; c < scene.cols(); ++c)
      for (std::size_t k = 0; k < ch; ++k)
        img.at(r, c, k) = static_cast<std::uint8_t>(std::floor(scene.channels[k](r, c) * 255.0 + 0.5));
  write_png(image_path, img);
  write_png(depth_path, to_gray8(scene.depth, 1.0));
}

}  // namespace mpcgh
