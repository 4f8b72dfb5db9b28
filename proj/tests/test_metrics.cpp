#include <gtest/gtest.h>

#include <random>

#include "mpcgh/metrics.hpp"
#include "mpcgh/selftest.hpp"

using namespace mpcgh;

namespace {

RealGrid random_real(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealGrid g(n, n);
  for (auto& v : g) v = u(rng);
  return g;
}

}  // namespace

TEST(Psnr, ExactMatchIsInfinite) {
  const RealGrid a = random_real(8, 1);
  EXPECT_TRUE(std::isinf(psnr(a, a, 1.0)));
  EXPECT_GT(psnr(a, a, 1.0), 0.0);
}

TEST(Psnr, KnownValues) {
  // MSE == peak^2 gives 0 dB; MSE == 0.01 with peak 1 gives 20 dB.
  EXPECT_NEAR(psnr(RealGrid(4, 4, 1.0), RealGrid(4, 4, 0.0), 1.0), 0.0, 1e-12);
  EXPECT_NEAR(psnr(RealGrid(4, 4, 0.1), RealGrid(4, 4, 0.0), 1.0), 20.0, 1e-12);
  EXPECT_THROW(psnr(RealGrid(4, 4), RealGrid(4, 4), 0.0), MetricError);
}

TEST(MaskedPsnr, IgnoresPixelsOutsideMask) {
  RealGrid a(4, 4, 0.5), b(4, 4, 0.5), mask(4, 4, 0.0);
  mask(0, 0) = 1.0;
  b(3, 3) = 0.0;  // outside the mask
  EXPECT_TRUE(std::isinf(masked_psnr(a, b, mask, 1.0)));
  b(0, 0) = 0.4;
  EXPECT_NEAR(masked_psnr(a, b, mask, 1.0), 20.0, 1e-10);
  EXPECT_THROW(masked_psnr(a, b, RealGrid(4, 4, 0.0), 1.0), MetricError);
}

TEST(Ssim, IdentityAndDegradation) {
  const RealGrid a = random_real(32, 2);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  RealGrid noisy = a;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.2);
  for (auto& v : noisy) v += n(rng);
  const double s = ssim(a, noisy);
  EXPECT_LT(s, 0.9);
  EXPECT_GT(s, -1.0);
  EXPECT_NEAR(ssim(a, noisy), ssim(noisy, a), 1e-12);
}

TEST(ReconstructStack, UniformPhaseGivesUniformIntensity) {
  SolverConfig c;
  c.optics = OpticalConfig{639e-9, 8e-6, 32, 32};
  const FocalStack s = reconstruct_stack(RealGrid(32, 32, 1.3), c, {-1e-3, 0.0, 1e-3});
  ASSERT_EQ(s.images.size(), 3u);
  for (const auto& im : s.images)
    for (double v : im) EXPECT_NEAR(v, 1.0, 1e-12);
  EXPECT_NEAR(s.peak(), 1.0, 1e-12);
}

TEST(ReconstructStack, ConservesEnergyWithoutBandLimit) {
  SolverConfig c;
  c.optics = OpticalConfig{639e-9, 8e-6, 32, 32};
  c.propagation.band_limit = false;
  const RealGrid phi = random_real(32, 4);
  for (Regime r : {Regime::near, Regime::far}) {
    c.regime = r;
    const FocalStack s = reconstruct_stack(phi, c, {-2e-3, 2e-3});
    for (const auto& im : s.images) {
      double e = 0.0;
      for (double v : im) e += v;
      EXPECT_NEAR(e, 32.0 * 32.0, 1e-8);
    }
  }
}

TEST(ReconstructStack, DoesNotModifyInputs) {
  SolverConfig c;
  c.optics = OpticalConfig{639e-9, 8e-6, 16, 16};
  const RealGrid phi = random_real(16, 5);
  const RealGrid copy = phi;
  const auto a = reconstruct_stack(phi, c, {0.0});
  const auto b = reconstruct_stack(phi, c, {0.0});
  EXPECT_TRUE(phi == copy);
  EXPECT_TRUE(a.images[0] == b.images[0]);
}

TEST(MakeReport, PerfectReconstructionScores) {
  const PlaneTargetSet t = small_gradient_problem(16, 6);
  FocalStack stack{t.targets, t.plane_offsets};
  const ReconstructionReport r = make_report(stack, t, LossWeights{});
  ASSERT_EQ(r.planes.size(), 2u);
  for (const auto& p : r.planes) {
    EXPECT_EQ(p.loss.total, 0.0);
    EXPECT_TRUE(std::isinf(p.psnr_db));
    EXPECT_TRUE(std::isinf(p.focus_psnr_db));
    ASSERT_TRUE(p.defocus_psnr_db.has_value());
    EXPECT_NEAR(p.ssim, 1.0, 1e-12);
  }
  EXPECT_EQ(r.final_objective, 0.0);
  EXPECT_DOUBLE_EQ(r.peak, t.peak());

  stack.images.pop_back();
  EXPECT_THROW(make_report(stack, t, LossWeights{}), MetricError);
}

TEST(MakeReport, DefocusScoreUsesReference) {
  const PlaneTargetSet ours = small_gradient_problem(16, 7);
  PlaneTargetSet naive = ours;
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < naive.targets[k].size(); ++i)
      naive.targets[k][i] = ours.targets[k][i] * ours.masks[k][i];
  // A stack equal to the naive targets is perfect in focus but misses the blur.
  const FocalStack stack{naive.targets, naive.plane_offsets};
  const ReconstructionReport r = make_report(stack, naive, LossWeights{}, &ours);
  for (const auto& p : r.planes) {
    EXPECT_TRUE(std::isinf(p.focus_psnr_db));
    EXPECT_TRUE(std::isinf(*p.out_of_focus_psnr_db));
    EXPECT_FALSE(std::isinf(*p.defocus_psnr_db));
  }
}
