#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpcgh/field.hpp"
#include "mpcgh/loss.hpp"
#include "mpcgh/solvers.hpp"
#include "mpcgh/targeting.hpp"

namespace mpcgh {

class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct FocalStack {
  std::vector<RealGrid> images;  // what the loss compares: |U|^2 (or |U|)
  std::vector<double> plane_offsets;

  double peak() const {
    double p = 0.0;
    for (const auto& im : images) p = std::max(p, max_value(im));
    return p;
  }
};

/// Simulates every plane of `offsets` from a displayed phase.
inline FocalStack reconstruct_stack(const RealGrid& displayed_phase, const SolverConfig& config,
                                    const std::vector<double>& offsets) {
  config.optics.validate();
  const ComplexField hologram = from_phase(displayed_phase, config.optics);
  FocalStack stack;
  stack.plane_offsets = offsets;
  for (double d : offsets) {
    stack.images.push_back(loss_image(simulate_plane(hologram, d, config).values(), config.loss));
  }
  return stack;
}

inline FocalStack reconstruct_stack(const HologramPhase& hologram, const SolverConfig& config,
                                    const std::vector<double>& offsets) {
  return reconstruct_stack(display_phase(hologram, config), config, offsets);
}

inline double mse_to_psnr(double mse, double peak) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

/// PSNR in dB; +inf on an exact match.
inline double psnr(const RealGrid& a, const RealGrid& b, double peak) {
  require_same_shape(a, b, "psnr");
  if (!(peak > 0.0)) throw MetricError("psnr peak must be > 0");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
  return mse_to_psnr(mse / static_cast<double>(a.size()), peak);
}

/// PSNR over pixels where mask == 1.
inline double masked_psnr(const RealGrid& a, const RealGrid& b, const RealGrid& mask, double peak) {
  require_same_shape(a, b, "masked_psnr");
  require_same_shape(a, mask, "masked_psnr");
  if (!(peak > 0.0)) throw MetricError("psnr peak must be > 0");
  double mse = 0.0, count = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask[i] > 0.5) {
      mse += (a[i] - b[i]) * (a[i] - b[i]);
      count += 1.0;
    }
  }
  if (count == 0.0) throw MetricError("masked psnr undefined for an all-zero mask");
  return mse_to_psnr(mse / count, peak);
}

namespace detail {

// Separable Gaussian filter over the valid region only.
inline RealGrid filter_valid(const RealGrid& img, const std::vector<double>& w) {
  const std::size_t k = w.size();
  const std::size_t rows = img.rows() - k + 1, cols = img.cols() - k + 1;
  RealGrid tmp(img.rows(), cols);
  for (std::size_t r = 0; r < img.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += w[j] * img(r, c + j);
      tmp(r, c) = s;
    }
  RealGrid out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += w[j] * tmp(r + j, c);
      out(r, c) = s;
    }
  return out;
}

}  // namespace detail

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03.
/// The window shrinks to the image size on grids smaller than 11 pixels.
inline double ssim(const RealGrid& a, const RealGrid& b, double data_range = 1.0) {
  require_same_shape(a, b, "ssim");
  if (!(data_range > 0.0)) throw MetricError("ssim data range must be > 0");
  std::size_t win = 11;
  const std::size_t smallest = std::min(a.rows(), a.cols());
  if (smallest < win) win = smallest % 2 == 1 ? smallest : smallest - 1;
  if (win == 0) throw MetricError("ssim needs a non-empty image");
  std::vector<double> w(win);
  double sum = 0.0;
  const double half = static_cast<double>(win / 2);
  for (std::size_t i = 0; i < win; ++i) {
    const double x = static_cast<double>(i) - half;
    w[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
    sum += w[i];
  }
  for (auto& v : w) v /= sum;

  RealGrid aa(a.rows(), a.cols()), bb(a.rows(), a.cols()), ab(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const RealGrid mu_a = detail::filter_valid(a, w), mu_b = detail::filter_valid(b, w);
  const RealGrid s_aa = detail::filter_valid(aa, w), s_bb = detail::filter_valid(bb, w),
                 s_ab = detail::filter_valid(ab, w);
  const double c1 = (0.01 * data_range) * (0.01 * data_range);
  const double c2 = (0.03 * data_range) * (0.03 * data_range);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = s_aa[i] - ma * ma, vb = s_bb[i] - mb * mb, cov = s_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

struct PlaneReport {
  double offset = 0.0;
  LossTerms loss;
  double psnr_db = 0.0;
  double focus_psnr_db = 0.0;
  std::optional<double> out_of_focus_psnr_db;  // none when the plane has no out-of-focus pixels
  std::optional<double> defocus_psnr_db;       // out-of-focus region vs the blurred reference
  double ssim = 0.0;
};

struct ReconstructionReport {
  std::vector<PlaneReport> planes;
  double final_objective = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  double peak = 0.0;
};

/// Scores a focal stack against its targets.
///
/// `reference` supplies the blurred targets used for the defocus score; when
/// absent the target set itself is used.
inline ReconstructionReport make_report(const FocalStack& stack, const PlaneTargetSet& targets,
                                        const LossWeights& weights,
                                        const PlaneTargetSet* reference = nullptr) {
  if (stack.images.size() != targets.n_planes()) {
    throw MetricError("focal stack has " + std::to_string(stack.images.size()) +
                      " planes, targets have " + std::to_string(targets.n_planes()));
  }
  const PlaneTargetSet& ref = reference ? *reference : targets;
  ReconstructionReport report;
  report.peak = targets.peak();
  const double peak = report.peak > 0.0 ? report.peak : 1.0;
  for (std::size_t k = 0; k < targets.n_planes(); ++k) {
    const RealGrid& im = stack.images[k];
    const RealGrid& p = targets.targets[k];
    const RealGrid& m = targets.masks[k];
    PlaneReport pr;
    pr.offset = stack.plane_offsets.at(k);
    pr.loss = loss_terms(im, p, m, weights);
    pr.psnr_db = psnr(im, p, peak);
    pr.focus_psnr_db = masked_psnr(im, p, m, peak);
    RealGrid out_mask(m.rows(), m.cols());
    bool any_out = false;
    for (std::size_t i = 0; i < m.size(); ++i) {
      out_mask[i] = 1.0 - m[i];
      any_out = any_out || out_mask[i] > 0.5;
    }
    if (any_out) {
      pr.out_of_focus_psnr_db = masked_psnr(im, p, out_mask, peak);
      pr.defocus_psnr_db = masked_psnr(im, ref.targets.at(k), out_mask, peak);
    }
    pr.ssim = ssim(im, p, peak);
    report.final_objective += pr.loss.total;
    report.planes.push_back(pr);
  }
  return report;
}

}  // namespace mpcgh
