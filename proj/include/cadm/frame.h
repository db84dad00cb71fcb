#ifndef CADM_FRAME_H_
#define CADM_FRAME_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cadm {

// 8-bit RGB frame, row-major with interleaved channels.
class Frame {
 public:
  static constexpr int kChannels = 3;

  // Zero-filled frame. Throws InvalidArgument if either dimension is < 1.
  Frame(int width, int height);
  // Takes ownership of |data|; its size must be width * height * 3.
  Frame(int width, int height, std::vector<uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  size_t pixel_count() const {
    return static_cast<size_t>(width_) * static_cast<size_t>(height_);
  }

  std::span<const uint8_t> data() const { return data_; }
  std::span<uint8_t> data() { return data_; }

  uint8_t at(int x, int y, int c) const { return data_[offset(x, y) + c]; }
  uint8_t& at(int x, int y, int c) { return data_[offset(x, y) + c]; }

  bool operator==(const Frame& other) const = default;

 private:
  size_t offset(int x, int y) const {
    return (static_cast<size_t>(y) * width_ + x) * kChannels;
  }

  int width_;
  int height_;
  std::vector<uint8_t> data_;
};

struct Rational {
  uint32_t num = 30;
  uint32_t den = 1;

  double value() const { return static_cast<double>(num) / den; }
  bool operator==(const Rational&) const = default;
};

struct VideoSequence {
  std::vector<Frame> frames;
  Rational fps;

  // Throws InputError when frames disagree on dimensions.
  void check_uniform() const;
};

// Planar real-valued image stack: data[(c * height + y) * width + x].
template <typename Real>
struct Planes {
  int channels = 0;
  int width = 0;
  int height = 0;
  std::vector<Real> data;

  Planes() = default;
  Planes(int channels_in, int width_in, int height_in, Real fill = Real(0))
      : channels(channels_in),
        width(width_in),
        height(height_in),
        data(static_cast<size_t>(channels_in) * width_in * height_in, fill) {}

  size_t plane_size() const { return static_cast<size_t>(width) * height; }
  Real& at(int c, int x, int y) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  Real at(int c, int x, int y) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  std::span<Real> plane(int c) {
    return std::span<Real>(data).subspan(c * plane_size(), plane_size());
  }
  std::span<const Real> plane(int c) const {
    return std::span<const Real>(data).subspan(c * plane_size(), plane_size());
  }
  bool same_shape(const Planes& other) const {
    return channels == other.channels && width == other.width &&
           height == other.height;
  }
  bool all_finite() const;
};

using FloatPlaneSet = Planes<double>;

// Round-half-up to u8 with saturation.
uint8_t round_to_u8(double value);

// Sample values as reals in u8 units (0..255).
FloatPlaneSet to_planes(const Frame& frame);
// Inverse of to_planes: rounds half-up and saturates to [0, 255].
Frame from_planes(const FloatPlaneSet& planes);

// Pixel values mapped to [-1, 1] via v / 127.5 - 1.
template <typename Real>
Planes<Real> to_signed_unit(const Frame& frame);
// Clamps to [-1, 1], then maps back to u8 with round-half-up.
template <typename Real>
Frame from_signed_unit(const Planes<Real>& planes);

// Border of |pad| zero pixels on every side.
Frame zero_pad(const Frame& frame, int pad);
// Sub-rectangle [x0, x0+width) x [y0, y0+height); must lie inside |frame|.
Frame crop(const Frame& frame, int x0, int y0, int width, int height);

// Bilinear resampling by integer factor |scale| using half-pixel centers
// with edge clamping. Throws InvalidScale when scale < 1.
Frame bilinear_upscale(const Frame& frame, int scale);

}  // namespace cadm

#endif  // CADM_FRAME_H_
