#include <gtest/gtest.h>

#include <set>

#include "cadm/color_quant.h"
#include "cadm/error.h"
#include "oracles.h"
#include "test_util.h"

namespace cadm {
namespace {

std::vector<Rgb> random_samples(size_t count, Rng& rng) {
  std::vector<Rgb> xs(count);
  for (Rgb& p : xs) {
    for (auto& v : p) v = static_cast<uint8_t>(rng.uniform_int(256));
  }
  return xs;
}

Codebook codebook_of(std::vector<Rgb> colors, int n) {
  Codebook b;
  b.n = n;
  b.centroids = std::move(colors);
  return b;
}

TEST(SamplePixels, SinglePixelVideo) {
  VideoSequence v;
  v.frames.push_back(Frame(1, 1, {4, 5, 6}));
  const auto s = sample_pixels(v, 10, 1);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], (Rgb{4, 5, 6}));
}

TEST(SamplePixels, DeterministicAndDistinct) {
  // Unique color per position so distinct colors mean distinct positions.
  Frame f(480, 270);
  for (int y = 0; y < 270; ++y) {
    for (int x = 0; x < 480; ++x) {
      const int id = y * 480 + x;
      f.at(x, y, 0) = uint8_t(id & 255);
      f.at(x, y, 1) = uint8_t((id >> 8) & 255);
      f.at(x, y, 2) = uint8_t(id >> 16);
    }
  }
  VideoSequence v;
  v.frames.push_back(f);
  const auto a = sample_pixels(v, 4096, 99);
  EXPECT_EQ(a, sample_pixels(v, 4096, 99));
  EXPECT_EQ(std::set<Rgb>(a.begin(), a.end()).size(), 4096u);
  EXPECT_NE(a, sample_pixels(v, 4096, 100));
}

TEST(SamplePixels, EmptyVideo) {
  EXPECT_EQ(code_of([] { sample_pixels(VideoSequence{}, 10, 1); }),
            ErrorCode::kEmptyInput);
}

TEST(FitCodebook, SeparableClustersRecovered) {
  const std::vector<Rgb> colors = {{0, 0, 0},     {255, 0, 0},   {0, 255, 0},
                                   {0, 0, 255},   {255, 255, 0}, {0, 255, 255},
                                   {255, 0, 255}, {255, 255, 255}};
  std::vector<Rgb> xs;
  for (int r = 0; r < 3; ++r) xs.insert(xs.end(), colors.begin(), colors.end());
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const Codebook b = fit_codebook(xs, 3, seed);
    std::vector<Rgb> sorted = colors;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(b.centroids, sorted);
    for (const Rgb& p : xs) EXPECT_EQ(b.centroids[nearest_centroid(b, p)], p);
  }
}

TEST(FitCodebook, DegenerateSamplesFillEveryCentroid) {
  const std::vector<Rgb> xs(20, Rgb{12, 34, 56});
  const Codebook b = fit_codebook(xs, 2, 1);
  for (const Rgb& c : b.centroids) EXPECT_EQ(c, (Rgb{12, 34, 56}));
}

TEST(FitCodebook, TwoGroupsGiveRoundedMeans) {
  // Well separated groups: each centroid is its group's rounded mean.
  std::vector<Rgb> xs = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {250, 250, 250}, {251, 250, 250}};
  const Codebook b = fit_codebook(xs, 1, 9);
  EXPECT_EQ(b.centroids[0], (Rgb{1, 0, 0}));     // (0.67, 0.33, 0)
  EXPECT_EQ(b.centroids[1], (Rgb{251, 250, 250}));  // 250.5 rounds up
}

TEST(FitCodebook, MatchesPlainLloydOracle) {
  Rng meta(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const size_t count = 16 + meta.uniform_int(497);
    const int n = 1 + int(meta.uniform_int(4));
    const uint64_t seed = meta.next_u64();
    const auto xs = random_samples(count, meta);
    KMeansTrace trace;
    const Codebook b = fit_codebook(xs, n, seed, {}, &trace);
    const auto want = oracle::plain_lloyd(xs, 1 << n, seed, 50, 0.5);
    EXPECT_EQ(b.centroids, want.centroids) << "trial " << trial;
    EXPECT_EQ(trace.assignments, want.assignments) << "trial " << trial;
    ASSERT_EQ(trace.inertia.size(), want.inertia.size());
    for (size_t i = 1; i < trace.inertia.size(); ++i) {
      EXPECT_LE(trace.inertia[i], trace.inertia[i - 1]);
    }
  }
}

TEST(FitCodebook, DeterministicForSeed) {
  Rng rng(8);
  const auto xs = random_samples(300, rng);
  const Codebook a = fit_codebook(xs, 4, 17);
  const Codebook b = fit_codebook(xs, 4, 17);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.source_hash, b.source_hash);
  EXPECT_TRUE(std::is_sorted(a.centroids.begin(), a.centroids.end()));
}

TEST(FitCodebook, ErrorNonIncreasingInDepth) {
  Rng rng(12);
  const auto xs = random_samples(512, rng);
  double prev = 1e300;
  for (int n = 1; n <= 8; ++n) {
    const Codebook b = fit_codebook(xs, n, 5);
    double err = 0;
    for (const Rgb& p : xs) {
      err += oracle::sq_dist(p, b.centroids[nearest_centroid(b, p)]);
    }
    err /= xs.size();
    EXPECT_LE(err, prev) << "n=" << n;
    prev = err;
  }
}

TEST(FitCodebook, EmptySamples) {
  EXPECT_EQ(code_of([] { fit_codebook(std::vector<Rgb>{}, 4, 1); }),
            ErrorCode::kEmptyInput);
}

TEST(Quantize, ExactMatchAndTieRule) {
  std::vector<Rgb> c(8, Rgb{200, 200, 200});
  c[2] = {10, 0, 0};
  c[5] = {30, 0, 0};
  const Codebook b = codebook_of(c, 3);
  EXPECT_EQ(nearest_centroid(b, {30, 0, 0}), 5);
  EXPECT_EQ(nearest_centroid(b, {20, 0, 0}), 2);
}

TEST(Quantize, MatchesBruteForceNearestNeighbour) {
  // Unsorted codebooks, then sorted ones with repeated entries.
  Rng rng(31);
  for (int trial = 0; trial < 16; ++trial) {
    const int n = 1 + trial % 8;
    auto colors = random_samples(size_t{1} << n, rng);
    if (trial >= 8) {
      for (size_t i = 1; i < colors.size(); i += 3) colors[i] = colors[i - 1];
      std::sort(colors.begin(), colors.end());
    }
    const Codebook b = codebook_of(colors, n);
    const Frame f = oracle::random_frame(16, 16, rng);
    const QuantizedFrame q = quantize_frame(f, b);
    const Frame d = dequantize_frame(q, b);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        const Rgb p{f.at(x, y, 0), f.at(x, y, 1), f.at(x, y, 2)};
        const uint16_t want = oracle::brute_nearest(b.centroids, p);
        EXPECT_EQ(q.indices[y * 16 + x], want);
        const Rgb got{d.at(x, y, 0), d.at(x, y, 1), d.at(x, y, 2)};
        EXPECT_EQ(oracle::sq_dist(p, got), oracle::sq_dist(p, b.centroids[want]));
      }
    }
  }
}

TEST(Quantize, CodebookColorsAreFixedPoints) {
  Rng rng(37);
  std::vector<Rgb> colors = random_samples(16, rng);
  std::sort(colors.begin(), colors.end());
  colors.erase(std::unique(colors.begin(), colors.end()), colors.end());
  while (colors.size() < 16) colors.push_back(colors.back());
  const Codebook b = codebook_of(colors, 4);
  Frame f(8, 8);
  for (int i = 0; i < 64; ++i) {
    const Rgb& c = colors[rng.uniform_int(16)];
    for (int k = 0; k < 3; ++k) f.at(i % 8, i / 8, k) = c[k];
  }
  EXPECT_EQ(dequantize_frame(quantize_frame(f, b), b), f);
}

TEST(Quantize, IdempotentOnIndexPlanes) {
  Rng rng(41);
  std::vector<Rgb> colors;
  for (int i = 0; i < 16; ++i) colors.push_back({uint8_t(i * 16), uint8_t(255 - i * 16), 7});
  const Codebook b = codebook_of(colors, 4);
  QuantizedFrame q{.width = 5, .height = 3, .n = 4, .indices = {}};
  for (int i = 0; i < 15; ++i) q.indices.push_back(uint16_t(rng.uniform_int(16)));
  EXPECT_EQ(quantize_frame(dequantize_frame(q, b), b).indices, q.indices);
}

TEST(Dequantize, SingleIndexAndOutOfRange) {
  std::vector<Rgb> colors(2, Rgb{1, 2, 3});
  colors[1] = {9, 8, 7};
  const Codebook b = codebook_of(colors, 1);
  QuantizedFrame q{.width = 2, .height = 2, .n = 1, .indices = {1, 1, 1, 1}};
  const Frame d = dequantize_frame(q, b);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(d.at(i % 2, i / 2, 0), 9);
  q.indices[3] = 2;
  EXPECT_EQ(code_of([&] { dequantize_frame(q, b); }), ErrorCode::kCorruptData);
}

}  // namespace
}  // namespace cadm
