#include "cadm/encoder.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cadm/error.h"

namespace cadm {

void EncoderConfig::validate() const {
  if (s < 1) {
    throw Error(ErrorCode::kInvalidConfig,
                "scaling factor s must be >= 1, got " + std::to_string(s));
  }
  if (n < 1 || n > 8) {
    throw Error(ErrorCode::kInvalidConfig,
                "bit-depth n must be in [1, 8], got " + std::to_string(n));
  }
  const double sigma = effective_blur_sigma();
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidConfig, "blur sigma must be >= 0");
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    taps[k + radius] = std::exp(-(k * k) / (2.0 * sigma * sigma));
    sum += taps[k + radius];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

FloatPlaneSet gaussian_blur(const FloatPlaneSet& planes, double sigma) {
  if (sigma < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "negative blur sigma");
  }
  if (sigma == 0.0) return planes;
  const auto taps = gaussian_kernel(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const int w = planes.width;
  const int h = planes.height;

  // Both passes accumulate whole rows tap by tap. Each output still sums
  // its taps in order from -radius, so results match the direct form.
  FloatPlaneSet horizontal(planes.channels, w, h);
  std::vector<double> padded(static_cast<size_t>(w) + 2 * radius);
  for (int c = 0; c < planes.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      const double* src = &planes.data[(static_cast<size_t>(c) * h + y) * w];
      for (int i = 0; i < w + 2 * radius; ++i) {
        padded[i] = src[std::clamp(i - radius, 0, w - 1)];
      }
      double* dst = &horizontal.at(c, 0, y);
      std::fill(dst, dst + w, 0.0);
      for (int k = 0; k <= 2 * radius; ++k) {
        const double tap = taps[k];
        const double* in = padded.data() + k;
        for (int x = 0; x < w; ++x) dst[x] += tap * in[x];
      }
    }
  }
  FloatPlaneSet out(planes.channels, w, h);
  for (int c = 0; c < planes.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      double* dst = &out.at(c, 0, y);
      std::fill(dst, dst + w, 0.0);
      for (int k = -radius; k <= radius; ++k) {
        const double tap = taps[k + radius];
        const double* in = &horizontal.at(c, 0, std::clamp(y + k, 0, h - 1));
        for (int x = 0; x < w; ++x) dst[x] += tap * in[x];
      }
    }
  }
  return out;
}

FloatPlaneSet gaussian_blur(const Frame& frame, double sigma) {
  return gaussian_blur(to_planes(frame), sigma);
}

AlignedLayout aligned_layout(int width, int height, int s) {
  auto axis = [s](int len, int& aligned, int& offset) {
    if (len % s == 0) {
      aligned = len;
      offset = 0;
      return;
    }
    aligned = (len + s - 1) / s * s;
    // Leftover padding is split with the smaller half before the content.
    offset = (aligned - len) / 2;
  };
  AlignedLayout layout{};
  axis(width, layout.aligned_width, layout.offset_x);
  axis(height, layout.aligned_height, layout.offset_y);
  return layout;
}

Frame align_to_scale(const Frame& frame, int s) {
  const AlignedLayout layout = aligned_layout(frame.width(), frame.height(), s);
  if (layout.aligned_width == frame.width() &&
      layout.aligned_height == frame.height()) {
    return frame;
  }
  // Zero-pad by ceil(s/2) on the axes that need it, then crop the aligned
  // window so that the content sits at (offset_x, offset_y).
  const int pad = (s + 1) / 2;
  const Frame padded = zero_pad(frame, pad);
  const int x0 =
      layout.aligned_width == frame.width() ? pad : pad - layout.offset_x;
  const int y0 =
      layout.aligned_height == frame.height() ? pad : pad - layout.offset_y;
  return crop(padded, x0, y0, layout.aligned_width, layout.aligned_height);
}

Frame downscale(const Frame& frame, const EncoderConfig& config) {
  config.validate();
  const int s = config.s;
  const FloatPlaneSet blurred =
      gaussian_blur(align_to_scale(frame, s), config.effective_blur_sigma());
  const int out_w = blurred.width / s;
  const int out_h = blurred.height / s;
  const double patch_area = static_cast<double>(s) * s;
  Frame out(out_w, out_h);
  for (int c = 0; c < 3; ++c) {
    for (int py = 0; py < out_h; ++py) {
      for (int px = 0; px < out_w; ++px) {
        double sum = 0.0;
        for (int dy = 0; dy < s; ++dy) {
          for (int dx = 0; dx < s; ++dx) {
            sum += blurred.at(c, px * s + dx, py * s + dy);
          }
        }
        out.at(px, py, c) = round_to_u8(sum / patch_area);
      }
    }
  }
  return out;
}

double compression_ratio(const EncoderConfig& config) {
  return 24.0 * config.s * config.s / config.n;
}

}  // namespace cadm
