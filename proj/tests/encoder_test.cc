#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "cadm/encoder.h"
#include "cadm/error.h"
#include "oracles.h"
#include "test_util.h"

namespace cadm {
namespace {

EncoderConfig config(int s, int n, std::optional<double> sigma = std::nullopt) {
  EncoderConfig c;
  c.s = s;
  c.n = n;
  c.blur_sigma = sigma;
  return c;
}

Frame constant_frame(int w, int h, uint8_t v) {
  Frame f(w, h);
  std::fill(f.data().begin(), f.data().end(), v);
  return f;
}

TEST(GaussianKernel, ImpulseCenterWeight) {
  // w0 = 1 / sum_{k=-3..3} exp(-k^2 / 2)
  double sum = 0;
  for (int k = -3; k <= 3; ++k) sum += std::exp(-k * k / 2.0);
  const double w0 = 1.0 / sum;

  Frame f(5, 1);
  f.at(2, 0, 0) = 255;
  const FloatPlaneSet out = gaussian_blur(f, 1.0);
  EXPECT_NEAR(out.at(0, 2, 0), 255.0 * w0, 1e-9);

  const auto k = gaussian_kernel(1.0);
  ASSERT_EQ(k.size(), 7u);
  EXPECT_NEAR(k[3], w0, 1e-15);
}

TEST(GaussianBlur, ConstantPreserved) {
  const Frame f = constant_frame(9, 7, 131);
  for (double sigma : {0.3, 1.0, 2.5}) {
    const FloatPlaneSet out = gaussian_blur(f, sigma);
    for (double v : out.data) EXPECT_NEAR(v, 131.0, 1e-9);
  }
}

TEST(GaussianBlur, ZeroSigmaIsIdentity) {
  Rng rng(2);
  const Frame f = oracle::random_frame(6, 4, rng);
  const FloatPlaneSet out = gaussian_blur(f, 0.0);
  EXPECT_EQ(out.data, to_planes(f).data);
}

TEST(Downscale, ConstantFrame) {
  for (int s = 1; s <= 5; ++s) {
    for (double sigma : {0.0, 0.7, 2.0}) {
      const EncoderConfig cfg = config(s, 4, sigma);
      const Frame out = downscale(constant_frame(8 * s, 3 * s, 200), cfg);
      EXPECT_EQ(out, constant_frame(8, 3, 200));
    }
  }
}

TEST(Downscale, PatchMeanExample) {
  Frame f(2, 2);
  const uint8_t v[] = {0, 2, 4, 6};
  for (int i = 0; i < 4; ++i) {
    for (int c = 0; c < 3; ++c) f.at(i % 2, i / 2, c) = v[i];
  }
  const Frame out = downscale(f, config(2, 4, 0.0));
  EXPECT_EQ(out.at(0, 0, 0), 3);
}

TEST(Downscale, MatchesBruteForcePatchMean) {
  Rng rng(23);
  for (int i = 0; i < 30; ++i) {
    const int s = 1 + int(rng.uniform_int(4));
    const Frame f = oracle::random_frame(s * (1 + int(rng.uniform_int(8))),
                                         s * (1 + int(rng.uniform_int(8))), rng);
    EXPECT_EQ(downscale(f, config(s, 4, 0.0)),
              oracle::patch_mean(f, s));
  }
}

TEST(Downscale, OutputDimensionsProperty) {
  Rng rng(29);
  for (int i = 0; i < 60; ++i) {
    const int w = 1 + int(rng.uniform_int(20));
    const int h = 1 + int(rng.uniform_int(20));
    const int s = 1 + int(rng.uniform_int(6));
    const Frame out = downscale(oracle::random_frame(w, h, rng),
                                config(s, 4));
    EXPECT_EQ(out.width(), (w + s - 1) / s);
    EXPECT_EQ(out.height(), (h + s - 1) / s);
  }
  EXPECT_EQ(downscale(Frame(5, 5), config(2, 4))
                .width(),
            3);
}

TEST(Downscale, PaddingOnlyWhenNeeded) {
  const AlignedLayout even = aligned_layout(8, 6, 2);
  EXPECT_EQ(even.aligned_width, 8);
  EXPECT_EQ(even.offset_x, 0);
  EXPECT_EQ(even.offset_y, 0);
  const AlignedLayout odd = aligned_layout(5, 4, 2);
  EXPECT_EQ(odd.aligned_width, 6);
  EXPECT_EQ(odd.aligned_height, 4);
}

TEST(EncoderConfig, Validation) {
  EXPECT_EQ(code_of([] { config(0, 4).validate(); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { config(2, 9).validate(); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { config(2, 4, -1.0).validate(); }),
            ErrorCode::kInvalidConfig);
  EXPECT_DOUBLE_EQ(config(3, 4)
                       .effective_blur_sigma(),
                   1.5);
}

TEST(CompressionRatio, Formula) {
  EXPECT_DOUBLE_EQ(compression_ratio(config(4, 4)), 96.0);
  EXPECT_DOUBLE_EQ(compression_ratio(config(1, 24)), 1.0);
  EXPECT_DOUBLE_EQ(compression_ratio(config(2, 8)), 12.0);
}

TEST(CompressionRatio, MonotoneInScaleAndDepth) {
  for (int s = 1; s < 8; ++s) {
    for (int n = 1; n <= 8; ++n) {
      const double r = compression_ratio(config(s, n));
      EXPECT_LT(r, compression_ratio(config(s + 1, n)));
      if (n < 8) {
        EXPECT_GT(r, compression_ratio(config(s, n + 1)));
      }
    }
  }
}

}  // namespace
}  // namespace cadm
