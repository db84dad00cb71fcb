#ifndef CADM_BITSTREAM_H_
#define CADM_BITSTREAM_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cadm/color_quant.h"
#include "cadm/frame.h"

namespace cadm {

// .cadm container, all integers little-endian:
//
//   offset  size  field
//        0     4  magic "CADM"
//        4     1  version (1)
//        5     2  orig_width
//        7     2  orig_height
//        9     1  s
//       10     1  n
//       11     2  fps_num
//       13     2  fps_den
//       15     4  frame_count
//       19  3*2^n codebook (R, G, B per entry)
//
// followed by frame_count index planes of ceil(w * h * n / 8) bytes each,
// where (w, h) are the decoded dimensions.
inline constexpr std::array<uint8_t, 4> kContainerMagic = {'C', 'A', 'D', 'M'};
inline constexpr uint8_t kContainerVersion = 1;
inline constexpr size_t kFixedHeaderBytes = 19;

struct ContainerHeader {
  uint8_t version = kContainerVersion;
  uint16_t orig_width = 0;
  uint16_t orig_height = 0;
  uint8_t s = 1;
  uint8_t n = 1;
  uint16_t fps_num = 30;
  uint16_t fps_den = 1;
  uint32_t frame_count = 0;
  Codebook codebook;

  int decoded_width() const { return (orig_width + s - 1) / s; }
  int decoded_height() const { return (orig_height + s - 1) / s; }
  double fps() const { return static_cast<double>(fps_num) / fps_den; }
  size_t plane_bytes() const;
  size_t header_bytes() const { return kFixedHeaderBytes + 3 * (size_t{1} << n); }

  // Throws CorruptData on out-of-range fields or codebook size mismatch.
  void validate() const;
};

struct CompressedVideo {
  ContainerHeader header;
  std::vector<std::vector<uint8_t>> frames;  // packed index planes

  size_t payload_bytes() const;
  size_t total_bytes() const { return header.header_bytes() + payload_bytes(); }
  bool operator==(const CompressedVideo& other) const;
};

// MSB-first n-bit packing; the last byte is zero-padded.
// Throws InvalidIndex if an index does not fit in n bits.
std::vector<uint8_t> pack_indices(std::span<const uint16_t> indices, int n);
// Reads |count| n-bit indices. Throws CorruptData if |bytes| is too short.
std::vector<uint16_t> unpack_indices(std::span<const uint8_t> bytes,
                                     size_t count, int n);

std::vector<uint8_t> serialize(const CompressedVideo& video);
// Throws NotACadmFile, UnsupportedVersion or CorruptData.
CompressedVideo deserialize(std::span<const uint8_t> bytes);

// Decoded index plane of frame |i|.
QuantizedFrame frame_indices(const CompressedVideo& video, size_t i);

// Payload-only rate: decoded w * h * n * fps / 1000.
double bitrate_kbps(const ContainerHeader& header);
// Header plus codebook, in bits.
uint64_t container_overhead_bits(int n);

// Reference bitrates (Kbps) of conventional codecs at 1080p, 720p, 480p,
// 360p and 240p.
struct ReferenceBitrate {
  const char* label;
  double kbps;
};
inline constexpr std::array<ReferenceBitrate, 5> kReferenceBitrates = {{
    {"1080p", 7552.0},
    {"720p", 3072.0},
    {"480p", 1536.0},
    {"360p", 896.0},
    {"240p", 576.0},
}};

// reference / achieved. Throws InvalidArgument on non-positive input.
double reduction_vs_reference(double achieved_kbps, double reference_kbps);

}  // namespace cadm

#endif  // CADM_BITSTREAM_H_
