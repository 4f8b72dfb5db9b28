#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <tuple>

#include "mpcgh/fft.hpp"
#include "mpcgh/field.hpp"

namespace mpcgh {

struct PropagationOptions {
  // Zero frequencies outside the band-limited angular spectrum criterion.
  bool band_limit = true;
  // Propagate on a 2x zero-padded grid and crop back.
  bool zero_pad = false;

  friend bool operator==(const PropagationOptions&, const PropagationOptions&) = default;
};

/// Angular-spectrum transfer function sampled on the fft2 bin layout.
struct TransferFunction {
  ComplexGrid values;
  double distance = 0.0;
  OpticalConfig config;
  bool band_limited = true;
};

/// Half-width (cycles/m) of the band kept for `distance` on the computational grid.
///
/// The limit follows the band-limited angular spectrum criterion with the
/// frequency step of the grid itself, 1/(N*pitch), so no padding is assumed.
inline double band_limit_frequency(double extent, double wavelength, double distance) {
  const double df = 1.0 / extent;
  const double t = 2.0 * df * std::abs(distance);
  return 1.0 / (wavelength * std::sqrt(t * t + 1.0));
}

inline TransferFunction transfer_function(const OpticalConfig& config, double distance,
                                          bool band_limit = true) {
  config.validate();
  TransferFunction tf;
  tf.values = ComplexGrid(config.height, config.width);
  tf.distance = distance;
  tf.config = config;
  tf.band_limited = band_limit;

  const double inv_lambda_sq = 1.0 / (config.wavelength * config.wavelength);
  const double fx_limit = band_limit_frequency(static_cast<double>(config.width) * config.pixel_pitch,
                                               config.wavelength, distance);
  const double fy_limit = band_limit_frequency(static_cast<double>(config.height) * config.pixel_pitch,
                                               config.wavelength, distance);
  for (std::size_t r = 0; r < config.height; ++r) {
    const double fy = fft_frequency(r, config.height, config.pixel_pitch);
    for (std::size_t c = 0; c < config.width; ++c) {
      const double fx = fft_frequency(c, config.width, config.pixel_pitch);
      const double arg = inv_lambda_sq - fx * fx - fy * fy;
      bool keep = arg > 0.0;
      if (band_limit && (std::abs(fx) >= fx_limit || std::abs(fy) >= fy_limit)) keep = false;
      tf.values(r, c) = keep ? std::polar(1.0, kTwoPi * distance * std::sqrt(arg)) : Complex{};
    }
  }
  return tf;
}

namespace detail {

class TransferCache {
 public:
  static TransferCache& instance() {
    static TransferCache cache;
    return cache;
  }

  std::shared_ptr<const TransferFunction> get(const OpticalConfig& config, double distance,
                                              bool band_limit) {
    const Key key{std::bit_cast<std::uint64_t>(config.wavelength),
                  std::bit_cast<std::uint64_t>(config.pixel_pitch), config.height, config.width,
                  std::bit_cast<std::uint64_t>(distance), band_limit};
    {
      std::shared_lock lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    auto tf = std::make_shared<const TransferFunction>(transfer_function(config, distance, band_limit));
    std::unique_lock lock(mutex_);
    if (entries_.size() >= kMaxEntries) entries_.clear();
    return entries_.try_emplace(key, std::move(tf)).first->second;
  }

 private:
  using Key = std::tuple<std::uint64_t, std::uint64_t, std::size_t, std::size_t, std::uint64_t, bool>;
  static constexpr std::size_t kMaxEntries = 256;

  std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const TransferFunction>> entries_;
};

inline ComplexGrid pad2x(const ComplexGrid& in) {
  ComplexGrid out(in.rows() * 2, in.cols() * 2);
  const std::size_t r0 = in.rows() / 2, c0 = in.cols() / 2;
  for (std::size_t r = 0; r < in.rows(); ++r)
    for (std::size_t c = 0; c < in.cols(); ++c) out(r + r0, c + c0) = in(r, c);
  return out;
}

inline ComplexGrid crop_half(const ComplexGrid& in) {
  ComplexGrid out(in.rows() / 2, in.cols() / 2);
  const std::size_t r0 = out.rows() / 2, c0 = out.cols() / 2;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = in(r + r0, c + c0);
  return out;
}

inline ComplexGrid apply_transfer(const ComplexGrid& values, const OpticalConfig& config,
                                  double distance, const PropagationOptions& options,
                                  bool conjugate) {
  OpticalConfig grid_config = config;
  ComplexGrid work = values;
  if (options.zero_pad) {
    work = pad2x(values);
    grid_config.height *= 2;
    grid_config.width *= 2;
  }
  const auto tf = TransferCache::instance().get(grid_config, distance, options.band_limit);
  ComplexGrid spectrum = fft2(work);
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    spectrum[i] *= conjugate ? std::conj(tf->values[i]) : tf->values[i];
  }
  ComplexGrid out = ifft2(spectrum);
  return options.zero_pad ? crop_half(out) : out;
}

}  // namespace detail

/// Shared, cached transfer function; safe to call from multiple threads.
inline std::shared_ptr<const TransferFunction> cached_transfer_function(const OpticalConfig& config,
                                                                        double distance,
                                                                        bool band_limit = true) {
  return detail::TransferCache::instance().get(config, distance, band_limit);
}

inline ComplexField propagate(const ComplexField& field, double distance,
                              const PropagationOptions& options = {}) {
  return {detail::apply_transfer(field.values(), field.config(), distance, options, false),
          field.config()};
}

/// Exact adjoint of propagate(., distance) under the complex inner product.
inline ComplexField propagate_adjoint(const ComplexField& cotangent, double distance,
                                      const PropagationOptions& options = {}) {
  return {detail::apply_transfer(cotangent.values(), cotangent.config(), distance, options, true),
          cotangent.config()};
}

/// Hop out by `hop_distance` and back to `plane_offset` from the hologram plane.
inline ComplexField forward_model_near(const ComplexField& hologram, double hop_distance,
                                       double plane_offset, const PropagationOptions& options = {}) {
  return propagate(propagate(hologram, hop_distance, options), -hop_distance + plane_offset, options);
}

inline ComplexField forward_model_near_adjoint(const ComplexField& cotangent, double hop_distance,
                                               double plane_offset,
                                               const PropagationOptions& options = {}) {
  return propagate_adjoint(propagate_adjoint(cotangent, -hop_distance + plane_offset, options),
                           hop_distance, options);
}

inline ComplexField forward_model_far(const ComplexField& hologram, double distance,
                                      const PropagationOptions& options = {}) {
  return propagate(hologram, distance, options);
}

inline ComplexField forward_model_far_adjoint(const ComplexField& cotangent, double distance,
                                              const PropagationOptions& options = {}) {
  return propagate_adjoint(cotangent, distance, options);
}

/// Complex inner product sum(conj(a) * b).
inline Complex inner_product(const ComplexGrid& a, const ComplexGrid& b) {
  require_same_shape(a, b, "inner_product");
  Complex acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

}  // namespace mpcgh
