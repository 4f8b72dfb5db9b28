#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "mpcgh/field.hpp"

namespace mpcgh {

/// Weights of the full-frame term (m0) and the in-focus term (m1).
struct LossWeights {
  double m0 = 1.0;
  double m1 = 2.1;
  // Compare |U| instead of |U|^2 against the targets.
  bool compare_amplitude = false;

  void validate() const {
    if (!(m0 >= 0.0 && m1 >= 0.0) || (m0 == 0.0 && m1 == 0.0)) {
      throw ConfigError("loss weights must be non-negative and not both zero");
    }
  }
};

struct LossTerms {
  double full = 0.0;   // mean((P - I)^2)
  double focus = 0.0;  // mean((M P - M I)^2)
  double total = 0.0;  // m0 * full + m1 * focus
};

inline LossTerms loss_terms(const RealGrid& reconstructed, const RealGrid& target,
                            const RealGrid& mask, const LossWeights& weights) {
  require_same_shape(reconstructed, target, "multiplane_loss");
  require_same_shape(reconstructed, mask, "multiplane_loss");
  LossTerms t;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = reconstructed[i] - target[i];
    const double md = mask[i] * reconstructed[i] - mask[i] * target[i];
    t.full += d * d;
    t.focus += md * md;
  }
  const auto n = static_cast<double>(target.size());
  t.full /= n;
  t.focus /= n;
  t.total = weights.m0 * t.full + weights.m1 * t.focus;
  return t;
}

inline double multiplane_loss(const RealGrid& reconstructed, const RealGrid& target,
                              const RealGrid& mask, const LossWeights& weights) {
  return loss_terms(reconstructed, target, mask, weights).total;
}

/// The image the loss sees for a field: intensity, or amplitude when so configured.
inline RealGrid loss_image(const ComplexGrid& field, const LossWeights& weights) {
  return weights.compare_amplitude ? amplitude(field) : intensity(field);
}

/// dL/dconj(U) for the loss evaluated on loss_image(U).
inline ComplexGrid loss_gradient_wrt_field(const ComplexGrid& field, const RealGrid& target,
                                           const RealGrid& mask, const LossWeights& weights) {
  require_same_shape(field, target, "loss_gradient_wrt_field");
  require_same_shape(field, mask, "loss_gradient_wrt_field");
  const auto n = static_cast<double>(field.size());
  ComplexGrid g(field.rows(), field.cols());
  for (std::size_t i = 0; i < field.size(); ++i) {
    // mask is binary, so (m0 + m1 * M^2) == (m0 + m1 * M).
    const double w = weights.m0 + weights.m1 * mask[i] * mask[i];
    const Complex u = field[i];
    if (weights.compare_amplitude) {
      const double a = std::abs(u);
      g[i] = a > 0.0 ? w * (a - target[i]) * u / (a * n) : Complex{};
    } else {
      g[i] = w * 2.0 * (std::norm(u) - target[i]) * u / n;
    }
  }
  return g;
}

/// Picks `count` distinct flat indices in [0, size) with a seeded shuffle.
inline std::vector<std::size_t> sample_indices(std::size_t size, std::size_t count,
                                               std::uint64_t seed) {
  std::vector<std::size_t> all(size);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(count, size));
  std::sort(all.begin(), all.end());
  return all;
}

/// Central-difference gradient of `loss_fn` at the requested coordinates of `params`.
template <class LossFn>
std::vector<double> finite_difference_oracle(LossFn&& loss_fn, std::span<const double> params,
                                             double step, std::span<const std::size_t> coords) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be > 0");
  std::vector<double> probe(params.begin(), params.end());
  std::vector<double> grad;
  grad.reserve(coords.size());
  for (std::size_t idx : coords) {
    const double saved = probe[idx];
    probe[idx] = saved + step;
    const double plus = loss_fn(std::span<const double>(probe));
    probe[idx] = saved - step;
    const double minus = loss_fn(std::span<const double>(probe));
    probe[idx] = saved;
    grad.push_back((plus - minus) / (2.0 * step));
  }
  return grad;
}

}  // namespace mpcgh
