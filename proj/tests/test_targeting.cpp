#include <gtest/gtest.h>

#include <random>

#include "mpcgh/scene.hpp"
#include "mpcgh/targeting.hpp"

using namespace mpcgh;

namespace {

// Brute-force zero-boundary convolution, independent of the FFT path.
RealGrid direct_convolve(const RealGrid& img, const RealGrid& k) {
  const long kr = static_cast<long>(k.rows() / 2), kc = static_cast<long>(k.cols() / 2);
  RealGrid out(img.rows(), img.cols(), 0.0);
  for (long r = 0; r < static_cast<long>(img.rows()); ++r)
    for (long c = 0; c < static_cast<long>(img.cols()); ++c) {
      double s = 0.0;
      for (long i = -kr; i <= kr; ++i)
        for (long j = -kc; j <= kc; ++j) {
          const long rr = r - i, cc = c - j;
          if (rr < 0 || cc < 0 || rr >= static_cast<long>(img.rows()) || cc >= static_cast<long>(img.cols()))
            continue;
          s += k(static_cast<std::size_t>(i + kr), static_cast<std::size_t>(j + kc)) *
               img(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
        }
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = s;
    }
  return out;
}

double max_diff(const RealGrid& a, const RealGrid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

RealGrid random_grid(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealGrid g(n, n);
  for (auto& v : g) v = u(rng);
  return g;
}

}  // namespace

TEST(QuantizeDepth, BinsAndClamp) {
  const RealGrid depth(1, 6, {0.1, 0.3, 0.6, 0.9, 1.0, 0.0});
  const IndexGrid idx = quantize_depth(depth, 4);
  const std::vector<int> expected{0, 1, 2, 3, 3, 0};
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(idx[i], expected[i]) << i;
}

TEST(QuantizeDepth, PlaneCountOutOfRange) {
  const RealGrid depth(2, 2, 0.5);
  EXPECT_THROW(quantize_depth(depth, 1), ConfigError);
  EXPECT_THROW(quantize_depth(depth, 17), ConfigError);
  EXPECT_NO_THROW(quantize_depth(depth, 16));
}

TEST(FocusMasks, PartitionThePlane) {
  const RealGrid depth = random_grid(16, 3);
  for (int n : {2, 3, 7, 16}) {
    const auto masks = focus_masks(quantize_depth(depth, n), n);
    for (std::size_t i = 0; i < depth.size(); ++i) {
      double sum = 0.0;
      for (const auto& m : masks) {
        EXPECT_TRUE(m[i] == 0.0 || m[i] == 1.0);
        sum += m[i];
      }
      EXPECT_EQ(sum, 1.0);
    }
  }
}

TEST(CenteredOffsets, SymmetricAboutZero) {
  const auto o3 = centered_plane_offsets(3, 1e-3);
  EXPECT_DOUBLE_EQ(o3[0], -1e-3);
  EXPECT_DOUBLE_EQ(o3[1], 0.0);
  EXPECT_DOUBLE_EQ(o3[2], 1e-3);
  const auto o2 = centered_plane_offsets(2, 2e-3);
  EXPECT_DOUBLE_EQ(o2[0], -1e-3);
  EXPECT_DOUBLE_EQ(o2[1], 1e-3);
}

TEST(GaussianKernel, FrozenValues) {
  // sigma = 1: 7x7 kernel normalized over its support (40-digit reference).
  const RealGrid k = gaussian_kernel(1.0);
  ASSERT_EQ(k.rows(), 7u);
  EXPECT_NEAR(k(3, 3), 0.1592411256907024544, 1e-15);
  EXPECT_NEAR(k(3, 0), 0.0017690091140438215839, 1e-16);
  EXPECT_NEAR(k(3, 6), k(3, 0), 1e-18);
  double sum = 0.0;
  for (double v : k) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-14);
  EXPECT_EQ(gaussian_kernel(0.0).size(), 1u);
  EXPECT_THROW(gaussian_kernel(-1.0), ConfigError);
}

TEST(ConvolveSame, MatchesDirectConvolution) {
  for (double sigma : {0.7, 2.0, 4.0}) {
    const RealGrid img = random_grid(20, static_cast<std::uint64_t>(sigma * 10));
    const RealGrid k = gaussian_kernel(sigma);
    EXPECT_LE(max_diff(convolve_same(img, k), direct_convolve(img, k)), 1e-12) << sigma;
  }
}

TEST(ComposeTargets, TwoHalfImageMatchesDirectOracle) {
  const std::size_t n = 24;
  RealGrid image = random_grid(n, 11), depth(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) depth(r, c) = c < n / 2 ? 0.25 : 0.75;
  TargetingParams p;
  p.n_planes = 2;
  p.sigma0 = 1.5;
  p.w0 = 0.5;
  p.w1 = 1.5;
  p.w2 = 0.8;
  const PlaneTargetSet t = compose_targets(image, depth, p);

  for (std::size_t k = 0; k < 2; ++k) {
    RealGrid own(n, n, 0.0), other(n, n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        const bool left = c < n / 2;
        ((left == (k == 0)) ? own : other)(r, c) = image(r, c);
      }
    const RealGrid blurred = direct_convolve(other, gaussian_kernel(1.5));
    RealGrid expected(n, n);
    for (std::size_t i = 0; i < expected.size(); ++i) expected[i] = 0.8 * (0.5 * blurred[i] + 1.5 * own[i]);
    EXPECT_LE(max_diff(t.targets[k], expected), 1e-12) << k;
  }
}

TEST(ComposeTargets, ZeroBlurSumsBackToImage) {
  const RealGrid image = random_grid(16, 4), depth = random_grid(16, 5);
  TargetingParams p;
  p.n_planes = 4;
  p.sigma0 = 0.0;
  const PlaneTargetSet t = compose_targets(image, depth, p);
  // Every plane sees the full sharp image when nothing is blurred.
  for (const auto& target : t.targets) EXPECT_LE(max_diff(target, image), 1e-15);

  p.mode = TargetingMode::naive;
  const PlaneTargetSet naive = compose_targets(image, depth, p);
  RealGrid sum(16, 16, 0.0);
  for (const auto& target : naive.targets)
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += target[i];
  EXPECT_LE(max_diff(sum, image), 1e-15);
}

TEST(ComposeTargets, NaiveIsFocusOnlyAndNeverBrighter) {
  const RealGrid image = random_grid(16, 6), depth = random_grid(16, 7);
  TargetingParams p;
  const PlaneTargetSet ours = compose_targets(image, depth, p);
  p.mode = TargetingMode::naive;
  const PlaneTargetSet naive = compose_targets(image, depth, p);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < image.size(); ++i) {
      EXPECT_EQ(naive.targets[k][i], naive.masks[k][i] * image[i]);
      EXPECT_LE(naive.targets[k][i], ours.targets[k][i] + 1e-15);
      EXPECT_GE(ours.targets[k][i], 0.0);
    }
}

TEST(ComposeTargets, SinglePlaneIsTheImage) {
  const RealGrid image = random_grid(8, 8), depth = random_grid(8, 9);
  TargetingParams p;
  p.n_planes = 1;
  const PlaneTargetSet t = compose_targets(image, depth, p);
  ASSERT_EQ(t.n_planes(), 1u);
  EXPECT_LE(max_diff(t.targets[0], image), 1e-15);
  EXPECT_DOUBLE_EQ(t.plane_offsets[0], 0.0);
}

TEST(ComposeTargets, UniformDepthLeavesOtherPlanesEmpty) {
  const RealGrid image = random_grid(8, 10), depth(8, 8, 0.0);
  const PlaneTargetSet t = compose_targets(image, depth, TargetingParams{});
  EXPECT_LE(max_diff(t.targets[0], image), 1e-15);
  // Planes 1 and 2 only hold blurred copies of plane 0.
  EXPECT_EQ(max_value(t.masks[1]), 0.0);
  EXPECT_GT(max_value(t.targets[2]), 0.0);
}

TEST(ComposeTargets, RejectsBadParameters) {
  const RealGrid image(4, 4, 0.5), depth(4, 4, 0.5);
  TargetingParams p;
  p.n_planes = 17;
  EXPECT_THROW(compose_targets(image, depth, p), ConfigError);
  p = {};
  p.w0 = 0.0;
  EXPECT_THROW(compose_targets(image, depth, p), ConfigError);
  p = {};
  p.sigma0 = -1.0;
  EXPECT_THROW(compose_targets(image, depth, p), ConfigError);
  EXPECT_THROW(compose_targets(image, RealGrid(4, 2, 0.5), TargetingParams{}), ConfigError);
}

TEST(Scene, ThreeRectangleLayout) {
  const RgbdScene s = three_rectangle_scene();
  ASSERT_EQ(s.rows(), 256u);
  EXPECT_DOUBLE_EQ(s.channels[0](50, 50), 1.0);
  EXPECT_DOUBLE_EQ(s.depth(50, 50), 0.1);
  EXPECT_DOUBLE_EQ(s.channels[0](0, 0), 0.0);
  const PlaneTargetSet t = compose_targets(s, 0, TargetingParams{});
  for (std::size_t k = 0; k < 3; ++k) EXPECT_GT(max_value(t.masks[k]), 0.0) << k;
}
