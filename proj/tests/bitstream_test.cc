#include <gtest/gtest.h>

#include "cadm/bitstream.h"
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

std::vector<uint16_t> random_indices(size_t count, int n, Rng& rng) {
  std::vector<uint16_t> xs(count);
  for (auto& x : xs) x = static_cast<uint16_t>(rng.uniform_int(uint64_t{1} << n));
  return xs;
}

CompressedVideo random_video(int w, int h, int s, int n, int frames, Rng& rng) {
  CompressedVideo v;
  v.header.orig_width = uint16_t(w);
  v.header.orig_height = uint16_t(h);
  v.header.s = uint8_t(s);
  v.header.n = uint8_t(n);
  v.header.fps_num = 30000;
  v.header.fps_den = 1001;
  v.header.frame_count = uint32_t(frames);
  v.header.codebook.n = n;
  for (int i = 0; i < (1 << n); ++i) {
    v.header.codebook.centroids.push_back(
        {uint8_t(rng.uniform_int(256)), uint8_t(rng.uniform_int(256)),
         uint8_t(rng.uniform_int(256))});
  }
  const size_t count = size_t(v.header.decoded_width()) * v.header.decoded_height();
  for (int f = 0; f < frames; ++f) {
    v.frames.push_back(pack_indices(random_indices(count, n, rng), n));
  }
  return v;
}

TEST(Pack, NibbleLayout) {
  const std::vector<uint16_t> xs = {0x1, 0x2};
  EXPECT_EQ(pack_indices(xs, 4), (std::vector<uint8_t>{0x12}));
}

TEST(Pack, FiveBitOracle) {
  const std::vector<uint16_t> xs = {1, 2, 3};
  const std::vector<uint8_t> want = {0x08, 0x86};
  EXPECT_EQ(oracle::pack_via_bitstring(xs, 5), want);
  EXPECT_EQ(pack_indices(xs, 5), want);
}

TEST(Pack, MatchesBitStringOracleAndRoundTrips) {
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 8;
    const auto xs = random_indices(rng.uniform_int(200), n, rng);
    const auto packed = pack_indices(xs, n);
    ASSERT_EQ(packed, oracle::pack_via_bitstring(xs, n));
    ASSERT_EQ(unpack_indices(packed, xs.size(), n), xs);
  }
}

TEST(Pack, Errors) {
  const std::vector<uint16_t> xs = {16};
  EXPECT_EQ(code_of([&] { pack_indices(xs, 4); }), ErrorCode::kInvalidIndex);
  const std::vector<uint8_t> one = {0xff};
  EXPECT_EQ(code_of([&] { unpack_indices(one, 3, 4); }), ErrorCode::kCorruptData);
}

TEST(Container, OnePixelSize) {
  Rng rng(1);
  const CompressedVideo v = random_video(1, 1, 1, 4, 1, rng);
  // 4 + 1 + 2 + 2 + 1 + 1 + 2 + 2 + 4 fixed header bytes.
  EXPECT_EQ(serialize(v).size(), 19u + 3u * 16u + 1u);
}

TEST(Container, SizeFormula) {
  Rng rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + int(rng.uniform_int(8));
    const int s = 1 + int(rng.uniform_int(4));
    const int w = 1 + int(rng.uniform_int(40));
    const int h = 1 + int(rng.uniform_int(40));
    const int frames = 1 + int(rng.uniform_int(4));
    const CompressedVideo v = random_video(w, h, s, n, frames, rng);
    const size_t dw = (w + s - 1) / s;
    const size_t dh = (h + s - 1) / s;
    const size_t plane = (dw * dh * n + 7) / 8;
    EXPECT_EQ(v.header.plane_bytes(), plane);
    EXPECT_EQ(serialize(v).size(), 19 + 3 * (size_t{1} << n) + frames * plane);
    EXPECT_EQ(v.total_bytes(), serialize(v).size());
  }
}

TEST(Container, RoundTripAndIdempotence) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const CompressedVideo v =
        random_video(1 + int(rng.uniform_int(64)), 1 + int(rng.uniform_int(64)),
                     1 + int(rng.uniform_int(4)), 1 + int(rng.uniform_int(8)),
                     1 + int(rng.uniform_int(3)), rng);
    const auto bytes = serialize(v);
    const CompressedVideo back = deserialize(bytes);
    ASSERT_TRUE(back == v);
    ASSERT_EQ(serialize(back), bytes);
  }
}

TEST(Container, LittleEndianFields) {
  Rng rng(4);
  const CompressedVideo v = random_video(0x0102, 3, 2, 4, 1, rng);
  const auto b = serialize(v);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "CADM");
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(b[5], 0x02);
  EXPECT_EQ(b[6], 0x01);
  EXPECT_EQ(b[11] | (b[12] << 8), 30000);
}

TEST(Container, Errors) {
  Rng rng(5);
  const auto bytes = serialize(random_video(8, 8, 2, 4, 2, rng));
  auto bad_magic = bytes;
  bad_magic[0] ^= 0xff;
  EXPECT_EQ(code_of([&] { deserialize(bad_magic); }), ErrorCode::kNotACadmFile);
  auto bad_version = bytes;
  bad_version[4] = 2;
  EXPECT_EQ(code_of([&] { deserialize(bad_version); }),
            ErrorCode::kUnsupportedVersion);
  for (size_t cut : {size_t{3}, size_t{10}, size_t{30}, bytes.size() - 1}) {
    const std::vector<uint8_t> part(bytes.begin(), bytes.begin() + cut);
    EXPECT_EQ(code_of([&] { deserialize(part); }),
              cut < 4 ? ErrorCode::kNotACadmFile : ErrorCode::kCorruptData)
        << cut;
  }
}

TEST(Bitrate, FormulaAndLinearity) {
  ContainerHeader h;
  h.orig_width = 480;
  h.orig_height = 270;
  h.s = 1;
  h.n = 4;
  EXPECT_DOUBLE_EQ(bitrate_kbps(h), 15552.0);
  h.n = 8;
  EXPECT_DOUBLE_EQ(bitrate_kbps(h), 31104.0);
  EXPECT_EQ(container_overhead_bits(4), 8u * (19 + 48));
}

TEST(Bitrate, RawOverPayloadMatchesRatio) {
  ContainerHeader h;
  h.orig_width = 1920;
  h.orig_height = 1080;
  h.s = 4;
  h.n = 4;
  const double raw = 1920.0 * 1080 * 24 * 30 / 1000;
  EXPECT_DOUBLE_EQ(raw, 1492992.0);
  EXPECT_DOUBLE_EQ(raw / bitrate_kbps(h),
                   compression_ratio(config(4, 4)));
}

TEST(Bitrate, ContainerAmortization) {
  // Large frames and many of them: total-file ratio within 1% of 24 s^2 / n.
  for (int s : {2, 4}) {
    for (int n : {4, 8}) {
      ContainerHeader h;
      h.orig_width = 256;
      h.orig_height = 256;
      h.s = uint8_t(s);
      h.n = uint8_t(n);
      h.frame_count = 30;
      const double raw = 256.0 * 256 * 3 * 30;
      const double total = h.header_bytes() + 30.0 * h.plane_bytes();
      const double want = 24.0 * s * s / n;
      EXPECT_LT(std::abs(raw / total - want) / want, 0.01);
    }
  }
}

TEST(Reduction, ReferenceConstants) {
  EXPECT_DOUBLE_EQ(kReferenceBitrates[0].kbps, 7552.0);
  EXPECT_DOUBLE_EQ(kReferenceBitrates[1].kbps, 3072.0);
  EXPECT_DOUBLE_EQ(kReferenceBitrates[2].kbps, 1536.0);
  EXPECT_DOUBLE_EQ(kReferenceBitrates[3].kbps, 896.0);
  EXPECT_DOUBLE_EQ(kReferenceBitrates[4].kbps, 576.0);
  EXPECT_DOUBLE_EQ(reduction_vs_reference(7552, 7552), 1.0);
  EXPECT_DOUBLE_EQ(reduction_vs_reference(1536, 3072), 2.0);
  EXPECT_DOUBLE_EQ(reduction_vs_reference(448, 896), 2.0);
  EXPECT_EQ(code_of([] { reduction_vs_reference(0, 896); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { reduction_vs_reference(10, -1); }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace cadm
