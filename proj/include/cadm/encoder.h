#ifndef CADM_ENCODER_H_
#define CADM_ENCODER_H_

#include <optional>

#include "cadm/frame.h"

namespace cadm {

struct EncoderConfig {
  int s = 4;  // resolution scaling factor
  int n = 4;  // color bit-depth, 2^n palette entries
  // Gaussian pre-filter width in source pixels; unset means s / 2.
  std::optional<double> blur_sigma;

  double effective_blur_sigma() const {
    return blur_sigma.value_or(static_cast<double>(s) / 2.0);
  }
  // Throws InvalidConfig unless 1 <= n <= 8, s >= 1 and sigma >= 0.
  void validate() const;
};

// Separable Gaussian, radius ceil(3 * sigma), clamp-to-edge. Output keeps
// u8 units (0..255). sigma == 0 returns the input converted unchanged.
FloatPlaneSet gaussian_blur(const Frame& frame, double sigma);
FloatPlaneSet gaussian_blur(const FloatPlaneSet& planes, double sigma);

// Normalized 1-D kernel taps for offsets -r..r.
std::vector<double> gaussian_kernel(double sigma);

// Placement of the original content inside the s-aligned working canvas
// used by downscale(). Decoders crop with the same offsets.
struct AlignedLayout {
  int aligned_width;
  int aligned_height;
  int offset_x;
  int offset_y;
};
AlignedLayout aligned_layout(int width, int height, int s);

// Pads/crops |frame| to the aligned canvas; a dimension that is already a
// multiple of s is left untouched.
Frame align_to_scale(const Frame& frame, int s);

// Blur then average non-overlapping s x s patches. Output dimensions are
// (ceil(w / s), ceil(h / s)).
Frame downscale(const Frame& frame, const EncoderConfig& config);

// Ratio of raw 24-bit full-resolution size to the encoded payload.
double compression_ratio(const EncoderConfig& config);

}  // namespace cadm

#endif  // CADM_ENCODER_H_
