#ifndef CADM_METRICS_H_
#define CADM_METRICS_H_

#include <vector>

#include "cadm/frame.h"

namespace cadm {

inline constexpr double kPsnrCapDb = 100.0;

// Mean squared error over all samples in u8 units.
double mse(const Frame& a, const Frame& b);
// 10 log10(255^2 / mse), or kPsnrCapDb for identical frames.
double psnr_from_mse(double mse);
double psnr(const Frame& a, const Frame& b);

// SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
// evaluated over valid window positions only and averaged over windows,
// then over channels. Throws ShapeError when a frame is smaller than the
// window or the dimensions differ.
double ssim(const Frame& a, const Frame& b);

struct FrameQuality {
  double mse;
  double psnr_db;
  double ssim;
};

struct QualityReport {
  std::vector<FrameQuality> frames;
  double mean_mse = 0.0;
  double mean_psnr_db = 0.0;
  double mean_ssim = 0.0;

  void add(const FrameQuality& q);
  void finalize();
};

QualityReport evaluate(const std::vector<Frame>& reference,
                       const std::vector<Frame>& test);

}  // namespace cadm

#endif  // CADM_METRICS_H_
