#pragma once

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "mpcgh/field.hpp"

namespace mpcgh {

namespace detail {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t rows, std::size_t cols, int sign) {
    const auto key = std::make_tuple(rows, cols, sign);
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<Complex> in(rows * cols), out(rows * cols);
    // ESTIMATE keeps plan selection (and therefore rounding) identical run to run.
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                                      reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

 private:
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

inline ComplexGrid unitary_dft(const ComplexGrid& in, int sign) {
  ComplexGrid out(in.rows(), in.cols());
  if (in.empty()) return out;
  fftw_plan plan = FftPlanCache::instance().get(in.rows(), in.cols(), sign);
  fftw_execute_dft(plan,
                   reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(in.size()));
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace detail

/// Unitary forward 2-D DFT, bins in standard (unshifted) order.
inline ComplexGrid fft2(const ComplexGrid& in) { return detail::unitary_dft(in, FFTW_FORWARD); }
/// Unitary inverse 2-D DFT.
inline ComplexGrid ifft2(const ComplexGrid& in) { return detail::unitary_dft(in, FFTW_BACKWARD); }

inline ComplexField fft2(const ComplexField& f) { return {fft2(f.values()), f.config()}; }
inline ComplexField ifft2(const ComplexField& f) { return {ifft2(f.values()), f.config()}; }

/// Frequency of bin `k` on an axis with `n` samples at spacing `pitch`, numpy fftfreq layout.
inline double fft_frequency(std::size_t k, std::size_t n, double pitch) {
  const auto signed_k = static_cast<long long>(k) - (k >= (n + 1) / 2 ? static_cast<long long>(n) : 0);
  return static_cast<double>(signed_k) / (static_cast<double>(n) * pitch);
}

}  // namespace mpcgh
