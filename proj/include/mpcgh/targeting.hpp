#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mpcgh/fft.hpp"
#include "mpcgh/field.hpp"

namespace mpcgh {

inline constexpr int kMaxPlanes = 16;

/// Intensity image (one or more channels) plus normalized depth, all in [0, 1].
/// Depth 0 is the plane nearest to the viewer.
struct RgbdScene {
  std::vector<RealGrid> channels;
  RealGrid depth;

  std::size_t rows() const noexcept { return depth.rows(); }
  std::size_t cols() const noexcept { return depth.cols(); }

  void validate() const {
    if (channels.empty()) throw ConfigError("scene has no image channels");
    for (const auto& ch : channels) {
      require_same_shape(ch, depth, "scene image vs depth");
      for (double v : ch)
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("scene image values must lie in [0, 1]");
    }
    for (double v : depth)
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("scene depth values must lie in [0, 1]");
  }
};

enum class TargetingMode { ours, naive };

inline std::string to_string(TargetingMode m) { return m == TargetingMode::ours ? "ours" : "naive"; }

inline TargetingMode parse_targeting_mode(const std::string& s) {
  if (s == "ours") return TargetingMode::ours;
  if (s == "naive") return TargetingMode::naive;
  throw ConfigError("unknown targeting mode '" + s + "' (expected ours|naive)");
}

struct TargetingParams {
  int n_planes = 3;
  double w0 = 1.0;  // defocus weight
  double w1 = 1.0;  // focus weight
  double w2 = 1.0;  // overall brightness
  double sigma0 = 2.0;  // blur per plane of separation, pixels
  double plane_spacing = 1e-3;  // m
  TargetingMode mode = TargetingMode::ours;
};

/// Per-plane targets, focus masks and axial offsets.
struct PlaneTargetSet {
  std::vector<RealGrid> targets;
  std::vector<RealGrid> masks;
  // Blurred contribution of every other plane, before weighting; zero in naive mode.
  std::vector<RealGrid> defocus;
  std::vector<double> plane_offsets;
  double w0 = 1.0, w1 = 1.0, w2 = 1.0;
  double sigma0 = 0.0;
  TargetingMode mode = TargetingMode::ours;

  std::size_t n_planes() const noexcept { return targets.size(); }
  std::size_t rows() const noexcept { return targets.empty() ? 0 : targets.front().rows(); }
  std::size_t cols() const noexcept { return targets.empty() ? 0 : targets.front().cols(); }

  double peak() const {
    double p = 0.0;
    for (const auto& t : targets) p = std::max(p, max_value(t));
    return p;
  }
};

/// Offsets (k - (n-1)/2) * spacing, so the stack is centred on offset 0.
inline std::vector<double> centered_plane_offsets(int n_planes, double spacing) {
  std::vector<double> out(static_cast<std::size_t>(n_planes));
  for (int k = 0; k < n_planes; ++k) out[k] = (k - (n_planes - 1) / 2.0) * spacing;
  return out;
}

inline IndexGrid quantize_depth(const RealGrid& depth, int n_planes) {
  if (n_planes < 2 || n_planes > kMaxPlanes) {
    throw ConfigError("n_planes must be in [2, 16], got " + std::to_string(n_planes));
  }
  IndexGrid out(depth.rows(), depth.cols());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const int idx = static_cast<int>(std::floor(depth[i] * n_planes));
    out[i] = std::clamp(idx, 0, n_planes - 1);
  }
  return out;
}

inline std::vector<RealGrid> focus_masks(const IndexGrid& plane_indices, int n_planes) {
  std::vector<RealGrid> masks(static_cast<std::size_t>(n_planes),
                              RealGrid(plane_indices.rows(), plane_indices.cols(), 0.0));
  for (std::size_t i = 0; i < plane_indices.size(); ++i) {
    const int k = plane_indices[i];
    if (k < 0 || k >= n_planes) {
      throw ConfigError("plane index " + std::to_string(k) + " out of range for " +
                        std::to_string(n_planes) + " planes");
    }
    masks[static_cast<std::size_t>(k)][i] = 1.0;
  }
  return masks;
}

inline RealGrid gaussian_kernel(double sigma) {
  if (!(sigma >= 0.0)) throw ConfigError("gaussian sigma must be >= 0");
  if (sigma == 0.0) return RealGrid(1, 1, 1.0);
  const auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
  const std::size_t n = 2 * radius + 1;
  RealGrid k(n, n);
  double sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double y = static_cast<double>(r) - static_cast<double>(radius);
      const double x = static_cast<double>(c) - static_cast<double>(radius);
      k(r, c) = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
      sum += k(r, c);
    }
  }
  for (auto& v : k) v /= sum;
  return k;
}

/// Linear (zero-boundary) convolution with a centred odd-sized kernel, same-size output.
inline RealGrid convolve_same(const RealGrid& image, const RealGrid& kernel) {
  const std::size_t kr = kernel.rows() / 2, kc = kernel.cols() / 2;
  if (kr == 0 && kc == 0) {
    RealGrid out = image;
    for (auto& v : out) v *= kernel[0];
    return out;
  }
  const std::size_t rows = image.rows() + 2 * kr, cols = image.cols() + 2 * kc;
  ComplexGrid a(rows, cols), b(rows, cols);
  for (std::size_t r = 0; r < image.rows(); ++r)
    for (std::size_t c = 0; c < image.cols(); ++c) a(r, c) = image(r, c);
  // Kernel centre sits at bin (0, 0) with negative offsets wrapped.
  for (std::size_t r = 0; r < kernel.rows(); ++r) {
    for (std::size_t c = 0; c < kernel.cols(); ++c) {
      const std::size_t rr = (r + rows - kr) % rows;
      const std::size_t cc = (c + cols - kc) % cols;
      b(rr, cc) = kernel(r, c);
    }
  }
  ComplexGrid fa = fft2(a);
  const ComplexGrid fb = fft2(b);
  const double scale = std::sqrt(static_cast<double>(rows * cols));
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i] * scale;
  const ComplexGrid full = ifft2(fa);
  RealGrid out(image.rows(), image.cols());
  for (std::size_t r = 0; r < image.rows(); ++r)
    for (std::size_t c = 0; c < image.cols(); ++c) out(r, c) = full(r, c).real();
  return out;
}

inline RealGrid gaussian_blur(const RealGrid& image, double sigma) {
  if (sigma == 0.0) return image;
  RealGrid out = convolve_same(image, gaussian_kernel(sigma));
  // Clamp FFT round-off so targets stay non-negative.
  for (auto& v : out) v = std::max(v, 0.0);
  return out;
}

inline void validate_targeting(const TargetingParams& p, bool allow_single_plane = false) {
  const int min_planes = allow_single_plane ? 1 : 2;
  if (p.n_planes < min_planes || p.n_planes > kMaxPlanes) {
    throw ConfigError("n_planes must be in [2, 16], got " + std::to_string(p.n_planes));
  }
  if (p.mode == TargetingMode::ours && !(p.w0 > 0.0 && p.w1 > 0.0 && p.w2 > 0.0)) {
    throw ConfigError("targeting weights w0, w1, w2 must be positive");
  }
  if (!(p.sigma0 >= 0.0)) throw ConfigError("sigma0 must be >= 0");
  if (!std::isfinite(p.plane_spacing)) throw ConfigError("plane spacing must be finite");
}

/// Builds per-plane targets from one image channel and its depth map.
///
/// In `ours` mode each plane keeps its own content sharp and receives the
/// content of every other plane j blurred with sigma0 * |j - k|; the blurred
/// contributions are summed. `naive` mode leaves other planes black.
inline PlaneTargetSet compose_targets(const RealGrid& image, const RealGrid& depth,
                                      const TargetingParams& params) {
  validate_targeting(params, /*allow_single_plane=*/true);
  require_same_shape(image, depth, "compose_targets image vs depth");
  const int n = params.n_planes;
  const IndexGrid indices =
      n == 1 ? IndexGrid(depth.rows(), depth.cols(), 0) : quantize_depth(depth, n);

  PlaneTargetSet set;
  set.masks = focus_masks(indices, n);
  set.plane_offsets = centered_plane_offsets(n, params.plane_spacing);
  set.w0 = params.w0;
  set.w1 = params.w1;
  set.w2 = params.w2;
  set.sigma0 = params.sigma0;
  set.mode = params.mode;

  std::vector<RealGrid> focus(static_cast<std::size_t>(n), RealGrid(image.rows(), image.cols()));
  for (int k = 0; k < n; ++k)
    for (std::size_t i = 0; i < image.size(); ++i) focus[k][i] = set.masks[k][i] * image[i];

  for (int k = 0; k < n; ++k) {
    RealGrid defocus(image.rows(), image.cols(), 0.0);
    if (params.mode == TargetingMode::ours) {
      for (int j = 0; j < n; ++j) {
        if (j == k) continue;
        const RealGrid blurred = gaussian_blur(focus[j], params.sigma0 * std::abs(j - k));
        for (std::size_t i = 0; i < defocus.size(); ++i) defocus[i] += blurred[i];
      }
    }
    RealGrid target(image.rows(), image.cols());
    if (params.mode == TargetingMode::ours) {
      for (std::size_t i = 0; i < target.size(); ++i)
        target[i] = params.w2 * (params.w0 * defocus[i] + params.w1 * focus[k][i]);
    } else {
      target = focus[k];
    }
    set.targets.push_back(std::move(target));
    set.defocus.push_back(std::move(defocus));
  }
  return set;
}

inline PlaneTargetSet compose_targets(const RgbdScene& scene, std::size_t channel,
                                      const TargetingParams& params) {
  scene.validate();
  if (channel >= scene.channels.size()) {
    throw ConfigError("scene channel " + std::to_string(channel) + " out of range");
  }
  return compose_targets(scene.channels[channel], scene.depth, params);
}

}  // namespace mpcgh
