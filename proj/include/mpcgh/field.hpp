#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mpcgh {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Raised for invalid dimensions, parameters or configuration values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major 2-D grid. Row index is y, column index is x.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Grid(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ConfigError("grid data size " + std::to_string(data_.size()) + " does not match " +
                        std::to_string(rows_) + "x" + std::to_string(cols_));
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool same_shape(const auto& other) const noexcept {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealGrid = Grid<double>;
using ComplexGrid = Grid<Complex>;
using IndexGrid = Grid<int>;

inline std::string shape_string(std::size_t rows, std::size_t cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

template <class A, class B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ConfigError(std::string(what) + ": shape mismatch " + shape_string(a.rows(), a.cols()) +
                      " vs " + shape_string(b.rows(), b.cols()));
  }
}

/// Physical sampling of a single-wavelength field.
struct OpticalConfig {
  double wavelength = 639e-9;  // m
  double pixel_pitch = 8e-6;   // m
  std::size_t height = 256;
  std::size_t width = 256;

  void validate() const {
    if (!(wavelength > 0.0) || !std::isfinite(wavelength)) {
      throw ConfigError("wavelength must be positive, got " + std::to_string(wavelength));
    }
    if (!(pixel_pitch > 0.0) || !std::isfinite(pixel_pitch)) {
      throw ConfigError("pixel pitch must be positive, got " + std::to_string(pixel_pitch));
    }
    if (height < 2 || width < 2 || height % 2 != 0 || width % 2 != 0) {
      throw ConfigError("grid dimensions must be even and >= 2, got " +
                        shape_string(height, width));
    }
  }

  friend bool operator==(const OpticalConfig&, const OpticalConfig&) = default;
};

/// Sampled complex optical field bound to its physical grid.
class ComplexField {
 public:
  ComplexField() = default;
  ComplexField(ComplexGrid values, OpticalConfig config)
      : values_(std::move(values)), config_(config) {
    config_.validate();
    if (values_.rows() != config_.height || values_.cols() != config_.width) {
      throw ConfigError("field shape " + shape_string(values_.rows(), values_.cols()) +
                        " does not match config " + shape_string(config_.height, config_.width));
    }
  }

  const ComplexGrid& values() const noexcept { return values_; }
  ComplexGrid& values() noexcept { return values_; }
  const OpticalConfig& config() const noexcept { return config_; }
  std::size_t rows() const noexcept { return values_.rows(); }
  std::size_t cols() const noexcept { return values_.cols(); }

  bool is_finite() const noexcept {
    for (const auto& v : values_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
  }

 private:
  ComplexGrid values_;
  OpticalConfig config_;
};

inline ComplexField from_amplitude_phase(const RealGrid& amplitude, const RealGrid& phase,
                                         const OpticalConfig& config) {
  config.validate();
  require_same_shape(amplitude, phase, "from_amplitude_phase");
  if (amplitude.rows() != config.height || amplitude.cols() != config.width) {
    throw ConfigError("from_amplitude_phase: grid " +
                      shape_string(amplitude.rows(), amplitude.cols()) +
                      " does not match config " + shape_string(config.height, config.width));
  }
  ComplexGrid values(amplitude.rows(), amplitude.cols());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(amplitude[i] >= 0.0)) {
      throw ConfigError("from_amplitude_phase: negative or NaN amplitude at index " +
                        std::to_string(i));
    }
    values[i] = std::polar(amplitude[i], phase[i]);
  }
  return ComplexField(std::move(values), config);
}

/// Unit-amplitude field carrying `phase`.
inline ComplexField from_phase(const RealGrid& phase, const OpticalConfig& config) {
  return from_amplitude_phase(RealGrid(phase.rows(), phase.cols(), 1.0), phase, config);
}

inline RealGrid amplitude(const ComplexGrid& values) {
  RealGrid out(values.rows(), values.cols());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::abs(values[i]);
  return out;
}

// Zero pixels report phase 0 so gradients never see atan2 of a signed zero.
inline RealGrid phase(const ComplexGrid& values) {
  RealGrid out(values.rows(), values.cols());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Complex v = values[i];
    if (v == Complex{}) {
      out[i] = 0.0;
      continue;
    }
    double p = std::arg(v);
    if (p <= -kPi) p = kPi;
    out[i] = p;
  }
  return out;
}

inline RealGrid intensity(const ComplexGrid& values) {
  RealGrid out(values.rows(), values.cols());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::norm(values[i]);
  return out;
}

inline RealGrid amplitude(const ComplexField& f) { return amplitude(f.values()); }
inline RealGrid phase(const ComplexField& f) { return phase(f.values()); }
inline RealGrid intensity(const ComplexField& f) { return intensity(f.values()); }

/// Wraps radians into [0, 2pi).
inline double wrap_phase(double p) {
  double w = std::fmod(p, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

inline RealGrid wrap_phase(const RealGrid& p) {
  RealGrid out(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = wrap_phase(p[i]);
  return out;
}

inline double max_value(const RealGrid& g) {
  double m = 0.0;
  bool first = true;
  for (double v : g) {
    if (first || v > m) m = v;
    first = false;
  }
  return m;
}

}  // namespace mpcgh
