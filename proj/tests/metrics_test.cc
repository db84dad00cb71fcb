#include <gtest/gtest.h>

#include <cmath>

#include "cadm/error.h"
#include "cadm/metrics.h"
#include "oracles.h"
#include "test_util.h"

namespace cadm {
namespace {

Frame constant_frame(int w, int h, uint8_t v) {
  Frame f(w, h);
  std::fill(f.data().begin(), f.data().end(), v);
  return f;
}

TEST(Psnr, CapAndClosedForm) {
  Rng rng(1);
  const Frame a = oracle::random_frame(16, 16, rng);
  EXPECT_EQ(psnr(a, a), 100.0);
  Frame b = constant_frame(16, 16, 100);
  Frame c = constant_frame(16, 16, 101);
  EXPECT_NEAR(psnr(b, c), 48.1308, 1e-3);
  EXPECT_NEAR(psnr(b, c), 20 * std::log10(255.0), 1e-12);
}

TEST(Psnr, MatchesTwoPassOracle) {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Frame a = oracle::random_frame(23, 17, rng);
    const Frame b = oracle::random_frame(23, 17, rng);
    const double want = 10 * std::log10(255.0 * 255.0 / oracle::mse_two_pass(a, b));
    EXPECT_NEAR(psnr(a, b), want, 1e-9);
  }
}

TEST(Psnr, StrictlyDecreasingInUniformError) {
  const Frame base = constant_frame(8, 8, 50);
  double prev = psnr(base, base);
  for (int e = 1; e < 100; ++e) {
    const double p = psnr(base, constant_frame(8, 8, uint8_t(50 + e)));
    EXPECT_LT(p, prev);
    prev = p;
  }
}

TEST(Ssim, IdenticalFramesGiveOne) {
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const Frame a = oracle::random_frame(11 + int(rng.uniform_int(20)),
                                         11 + int(rng.uniform_int(20)), rng);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  }
}

TEST(Ssim, ConstantFramesClosedForm) {
  const double c1 = (0.01 * 255) * (0.01 * 255);
  for (auto [mx, my] : {std::pair{40, 200}, std::pair{0, 255}, std::pair{128, 129}}) {
    const double want = (2.0 * mx * my + c1) / (double(mx) * mx + double(my) * my + c1);
    EXPECT_NEAR(ssim(constant_frame(16, 12, uint8_t(mx)), constant_frame(16, 12, uint8_t(my))),
                want, 1e-9);
  }
}

TEST(Ssim, MatchesDirectWindowOracle) {
  Rng rng(4);
  for (int i = 0; i < 5; ++i) {
    const Frame a = oracle::random_frame(20, 15, rng);
    Frame b = a;
    for (auto& v : b.data()) v = uint8_t(std::clamp(int(v) + int(rng.uniform_int(61)) - 30, 0, 255));
    EXPECT_NEAR(ssim(a, b), oracle::ssim_direct(a, b), 1e-9);
  }
}

TEST(Ssim, InvertedHighContrastIsLow) {
  Frame a(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      for (int c = 0; c < 3; ++c) a.at(x, y, c) = ((x / 4 + y / 4) % 2) ? 255 : 0;
    }
  }
  Frame b = a;
  for (auto& v : b.data()) v = uint8_t(255 - v);
  EXPECT_LT(ssim(a, b), 0.2);
  EXPECT_NEAR(ssim(a, b), oracle::ssim_direct(a, b), 1e-9);
}

TEST(Metrics, Symmetry) {
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    const Frame a = oracle::random_frame(17, 13, rng);
    const Frame b = oracle::random_frame(17, 13, rng);
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    EXPECT_EQ(ssim(a, b), ssim(b, a));
  }
}

TEST(Metrics, ShapeErrors) {
  EXPECT_EQ(code_of([] { psnr(Frame(2, 2), Frame(3, 2)); }), ErrorCode::kShapeError);
  EXPECT_EQ(code_of([] { ssim(Frame(10, 20), Frame(10, 20)); }), ErrorCode::kShapeError);
}

TEST(Metrics, ReportAggregates) {
  std::vector<Frame> ref = {constant_frame(12, 12, 10), constant_frame(12, 12, 20)};
  std::vector<Frame> test = {constant_frame(12, 12, 10), constant_frame(12, 12, 21)};
  const QualityReport r = evaluate(ref, test);
  ASSERT_EQ(r.frames.size(), 2u);
  EXPECT_DOUBLE_EQ(r.mean_mse, 0.5);
  EXPECT_DOUBLE_EQ(r.mean_psnr_db, (100.0 + 20 * std::log10(255.0)) / 2);
}

}  // namespace
}  // namespace cadm
