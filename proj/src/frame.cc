#include "cadm/frame.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "cadm/error.h"

namespace cadm {
namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "frame dimensions must be positive, got " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

Frame::Frame(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  data_.assign(pixel_count() * kChannels, 0);
}

Frame::Frame(int width, int height, std::vector<uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != pixel_count() * kChannels) {
    throw Error(ErrorCode::kInvalidArgument,
                "frame data length " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(width) + "x" +
                    std::to_string(height) + "x3");
  }
}

void VideoSequence::check_uniform() const {
  if (frames.empty()) return;
  const int w = frames.front().width();
  const int h = frames.front().height();
  for (size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].width() != w || frames[i].height() != h) {
      throw Error(ErrorCode::kInputError,
                  "frame " + std::to_string(i) + " is " +
                      std::to_string(frames[i].width()) + "x" +
                      std::to_string(frames[i].height()) + ", expected " +
                      std::to_string(w) + "x" + std::to_string(h));
    }
  }
}

template <typename Real>
bool Planes<Real>::all_finite() const {
  return std::all_of(data.begin(), data.end(),
                     [](Real v) { return std::isfinite(v); });
}

template struct Planes<float>;
template struct Planes<double>;

uint8_t round_to_u8(double value) {
  const double r = std::floor(value + 0.5);
  if (!(r > 0.0)) return 0;
  if (r >= 255.0) return 255;
  return static_cast<uint8_t>(r);
}

FloatPlaneSet to_planes(const Frame& frame) {
  FloatPlaneSet out(Frame::kChannels, frame.width(), frame.height());
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      for (int c = 0; c < Frame::kChannels; ++c) {
        out.at(c, x, y) = frame.at(x, y, c);
      }
    }
  }
  return out;
}

Frame from_planes(const FloatPlaneSet& planes) {
  Frame out(planes.width, planes.height);
  for (int y = 0; y < planes.height; ++y) {
    for (int x = 0; x < planes.width; ++x) {
      for (int c = 0; c < Frame::kChannels; ++c) {
        out.at(x, y, c) = round_to_u8(planes.at(c, x, y));
      }
    }
  }
  return out;
}

template <typename Real>
Planes<Real> to_signed_unit(const Frame& frame) {
  Planes<Real> out(Frame::kChannels, frame.width(), frame.height());
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      for (int c = 0; c < Frame::kChannels; ++c) {
        out.at(c, x, y) =
            static_cast<Real>(frame.at(x, y, c) / 127.5 - 1.0);
      }
    }
  }
  return out;
}

template <typename Real>
Frame from_signed_unit(const Planes<Real>& planes) {
  if (planes.channels != Frame::kChannels) {
    throw Error(ErrorCode::kShapeError, "expected 3 channels, got " +
                                            std::to_string(planes.channels));
  }
  Frame out(planes.width, planes.height);
  for (int y = 0; y < planes.height; ++y) {
    for (int x = 0; x < planes.width; ++x) {
      for (int c = 0; c < Frame::kChannels; ++c) {
        const double v =
            std::clamp(static_cast<double>(planes.at(c, x, y)), -1.0, 1.0);
        out.at(x, y, c) = round_to_u8((v + 1.0) * 127.5);
      }
    }
  }
  return out;
}

template Planes<float> to_signed_unit<float>(const Frame&);
template Planes<double> to_signed_unit<double>(const Frame&);
template Frame from_signed_unit<float>(const Planes<float>&);
template Frame from_signed_unit<double>(const Planes<double>&);

Frame zero_pad(const Frame& frame, int pad) {
  if (pad < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative padding");
  }
  if (pad == 0) return frame;
  Frame out(frame.width() + 2 * pad, frame.height() + 2 * pad);
  const size_t row_bytes = static_cast<size_t>(frame.width()) * 3;
  for (int y = 0; y < frame.height(); ++y) {
    std::copy_n(&frame.data()[static_cast<size_t>(y) * row_bytes], row_bytes,
                &out.at(pad, y + pad, 0));
  }
  return out;
}

Frame crop(const Frame& frame, int x0, int y0, int width, int height) {
  if (x0 < 0 || y0 < 0 || width < 1 || height < 1 ||
      x0 + width > frame.width() || y0 + height > frame.height()) {
    throw Error(ErrorCode::kInvalidArgument, "crop window outside frame");
  }
  Frame out(width, height);
  const size_t row_bytes = static_cast<size_t>(width) * 3;
  for (int y = 0; y < height; ++y) {
    std::copy_n(frame.data().data() +
                    (static_cast<size_t>(y0 + y) * frame.width() + x0) * 3,
                row_bytes, &out.at(0, y, 0));
  }
  return out;
}

namespace {

struct Tap {
  int lo;
  int hi;
  double frac;
};

// Source taps for each destination index along one axis.
std::vector<Tap> bilinear_taps(int src, int scale) {
  std::vector<Tap> taps(static_cast<size_t>(src) * scale);
  for (size_t i = 0; i < taps.size(); ++i) {
    double pos = (static_cast<double>(i) + 0.5) / scale - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(pos));
    taps[i] = {lo, std::min(lo + 1, src - 1), pos - lo};
  }
  return taps;
}

}  // namespace

Frame bilinear_upscale(const Frame& frame, int scale) {
  if (scale < 1) {
    throw Error(ErrorCode::kInvalidScale,
                "scale must be >= 1, got " + std::to_string(scale));
  }
  if (scale == 1) return frame;
  const auto xs = bilinear_taps(frame.width(), scale);
  const auto ys = bilinear_taps(frame.height(), scale);
  Frame out(frame.width() * scale, frame.height() * scale);
  for (int y = 0; y < out.height(); ++y) {
    const Tap& ty = ys[y];
    for (int x = 0; x < out.width(); ++x) {
      const Tap& tx = xs[x];
      for (int c = 0; c < 3; ++c) {
        const double top = frame.at(tx.lo, ty.lo, c) * (1.0 - tx.frac) +
                           frame.at(tx.hi, ty.lo, c) * tx.frac;
        const double bottom = frame.at(tx.lo, ty.hi, c) * (1.0 - tx.frac) +
                              frame.at(tx.hi, ty.hi, c) * tx.frac;
        out.at(x, y, c) = round_to_u8(top * (1.0 - ty.frac) + bottom * ty.frac);
      }
    }
  }
  return out;
}

}  // namespace cadm
