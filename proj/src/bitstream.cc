#include "cadm/bitstream.h"

#include <algorithm>
#include <string>

#include "cadm/error.h"

namespace cadm {
namespace {

size_t packed_size(size_t count, int n) {
  return (count * static_cast<size_t>(n) + 7) / 8;
}

class ByteWriter {
 public:
  void u8(uint8_t v) { out_.push_back(v); }
  void u16(uint16_t v) {
    out_.push_back(static_cast<uint8_t>(v));
    out_.push_back(static_cast<uint8_t>(v >> 8));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void bytes(std::span<const uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<uint8_t> take() { return std::move(out_); }
  void reserve(size_t n) { out_.reserve(n); }

 private:
  std::vector<uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> in) : in_(in) {}

  void need(size_t n, const char* what) const {
    if (in_.size() - pos_ < n) {
      throw Error(ErrorCode::kCorruptData,
                  std::string("truncated container while reading ") + what);
    }
  }
  uint8_t u8(const char* what) {
    need(1, what);
    return in_[pos_++];
  }
  uint16_t u16(const char* what) {
    need(2, what);
    const uint16_t v = static_cast<uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::span<const uint8_t> bytes(size_t n, const char* what) {
    need(n, what);
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

}  // namespace

size_t ContainerHeader::plane_bytes() const {
  return packed_size(
      static_cast<size_t>(decoded_width()) * static_cast<size_t>(decoded_height()),
      n);
}

void ContainerHeader::validate() const {
  if (n < 1 || n > 8) {
    throw Error(ErrorCode::kCorruptData, "n out of range: " + std::to_string(n));
  }
  if (s < 1) throw Error(ErrorCode::kCorruptData, "s must be >= 1");
  if (orig_width < 1 || orig_height < 1) {
    throw Error(ErrorCode::kCorruptData, "zero frame dimensions");
  }
  if (fps_num == 0 || fps_den == 0) {
    throw Error(ErrorCode::kCorruptData, "fps must be positive");
  }
  if (frame_count < 1) throw Error(ErrorCode::kCorruptData, "frame_count is 0");
  if (codebook.n != n || codebook.centroids.size() != (size_t{1} << n)) {
    throw Error(ErrorCode::kCorruptData, "codebook does not match n");
  }
}

size_t CompressedVideo::payload_bytes() const {
  size_t total = 0;
  for (const auto& f : frames) total += f.size();
  return total;
}

bool CompressedVideo::operator==(const CompressedVideo& other) const {
  const ContainerHeader& a = header;
  const ContainerHeader& b = other.header;
  return a.version == b.version && a.orig_width == b.orig_width &&
         a.orig_height == b.orig_height && a.s == b.s && a.n == b.n &&
         a.fps_num == b.fps_num && a.fps_den == b.fps_den &&
         a.frame_count == b.frame_count && a.codebook.n == b.codebook.n &&
         a.codebook.centroids == b.codebook.centroids && frames == other.frames;
}

std::vector<uint8_t> pack_indices(std::span<const uint16_t> indices, int n) {
  if (n < 1 || n > 16) {
    throw Error(ErrorCode::kInvalidArgument, "bit width must be in [1, 16]");
  }
  std::vector<uint8_t> out(packed_size(indices.size(), n), 0);
  size_t bit = 0;
  for (size_t i = 0; i < indices.size(); ++i) {
    const uint32_t v = indices[i];
    if (v >> n) {
      throw Error(ErrorCode::kInvalidIndex,
                  "index " + std::to_string(v) + " at position " +
                      std::to_string(i) + " needs more than " +
                      std::to_string(n) + " bits");
    }
    for (int b = n - 1; b >= 0; --b, ++bit) {
      if ((v >> b) & 1u) out[bit >> 3] |= static_cast<uint8_t>(0x80u >> (bit & 7));
    }
  }
  return out;
}

std::vector<uint16_t> unpack_indices(std::span<const uint8_t> bytes,
                                     size_t count, int n) {
  if (n < 1 || n > 16) {
    throw Error(ErrorCode::kInvalidArgument, "bit width must be in [1, 16]");
  }
  if (bytes.size() < packed_size(count, n)) {
    throw Error(ErrorCode::kCorruptData, "index plane truncated");
  }
  std::vector<uint16_t> out(count);
  size_t bit = 0;
  for (size_t i = 0; i < count; ++i) {
    uint32_t v = 0;
    for (int b = 0; b < n; ++b, ++bit) {
      v = (v << 1) | ((bytes[bit >> 3] >> (7 - (bit & 7))) & 1u);
    }
    out[i] = static_cast<uint16_t>(v);
  }
  return out;
}

std::vector<uint8_t> serialize(const CompressedVideo& video) {
  const ContainerHeader& h = video.header;
  h.validate();
  if (video.frames.size() != h.frame_count) {
    throw Error(ErrorCode::kInvalidArgument,
                "frame_count " + std::to_string(h.frame_count) + " but " +
                    std::to_string(video.frames.size()) + " planes");
  }
  const size_t plane = h.plane_bytes();
  for (const auto& f : video.frames) {
    if (f.size() != plane) {
      throw Error(ErrorCode::kInvalidArgument, "index plane has wrong size");
    }
  }
  ByteWriter w;
  w.reserve(video.total_bytes());
  w.bytes(kContainerMagic);
  w.u8(h.version);
  w.u16(h.orig_width);
  w.u16(h.orig_height);
  w.u8(h.s);
  w.u8(h.n);
  w.u16(h.fps_num);
  w.u16(h.fps_den);
  w.u32(h.frame_count);
  for (const Rgb& c : h.codebook.centroids) w.bytes(c);
  for (const auto& f : video.frames) w.bytes(f);
  return w.take();
}

CompressedVideo deserialize(std::span<const uint8_t> bytes) {
  if (bytes.size() < kContainerMagic.size() ||
      !std::equal(kContainerMagic.begin(), kContainerMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kNotACadmFile, "bad magic");
  }
  ByteReader r(bytes.subspan(kContainerMagic.size()));
  CompressedVideo video;
  ContainerHeader& h = video.header;
  h.version = r.u8("version");
  if (h.version != kContainerVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "container version " + std::to_string(h.version));
  }
  h.orig_width = r.u16("orig_width");
  h.orig_height = r.u16("orig_height");
  h.s = r.u8("s");
  h.n = r.u8("n");
  h.fps_num = r.u16("fps_num");
  h.fps_den = r.u16("fps_den");
  h.frame_count = r.u32("frame_count");
  if (h.n < 1 || h.n > 8) {
    throw Error(ErrorCode::kCorruptData, "n out of range: " + std::to_string(h.n));
  }
  h.codebook.n = h.n;
  const size_t entries = size_t{1} << h.n;
  const auto book = r.bytes(3 * entries, "codebook");
  h.codebook.centroids.resize(entries);
  for (size_t i = 0; i < entries; ++i) {
    h.codebook.centroids[i] = Rgb{book[3 * i], book[3 * i + 1], book[3 * i + 2]};
  }
  h.validate();
  const size_t plane = h.plane_bytes();
  if (r.remaining() / plane < h.frame_count) {
    throw Error(ErrorCode::kCorruptData,
                "truncated payload: " + std::to_string(r.remaining()) +
                    " bytes for " + std::to_string(h.frame_count) + " frames");
  }
  if (r.remaining() != plane * h.frame_count) {
    throw Error(ErrorCode::kCorruptData, "trailing bytes after last frame");
  }
  video.frames.reserve(h.frame_count);
  for (uint32_t i = 0; i < h.frame_count; ++i) {
    const auto p = r.bytes(plane, "index plane");
    video.frames.emplace_back(p.begin(), p.end());
  }
  return video;
}

QuantizedFrame frame_indices(const CompressedVideo& video, size_t i) {
  const ContainerHeader& h = video.header;
  QuantizedFrame q;
  q.width = h.decoded_width();
  q.height = h.decoded_height();
  q.n = h.n;
  q.indices = unpack_indices(
      video.frames.at(i), static_cast<size_t>(q.width) * q.height, h.n);
  return q;
}

double bitrate_kbps(const ContainerHeader& header) {
  return static_cast<double>(header.decoded_width()) * header.decoded_height() *
         header.n * header.fps() / 1000.0;
}

uint64_t container_overhead_bits(int n) {
  return 8 * (kFixedHeaderBytes + 3 * (uint64_t{1} << n));
}

double reduction_vs_reference(double achieved_kbps, double reference_kbps) {
  if (!(achieved_kbps > 0.0) || !(reference_kbps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bitrates must be positive");
  }
  return reference_kbps / achieved_kbps;
}

}  // namespace cadm
