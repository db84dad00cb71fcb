#include "cadm/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "cadm/error.h"

namespace cadm {
namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

void check_same_dims(const Frame& a, const Frame& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kShapeError,
                std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
}

std::vector<double> window_weights() {
  std::vector<double> w(kWindow * kWindow);
  double sum = 0.0;
  const int r = kWindow / 2;
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      const double v =
          std::exp(-(x * x + y * y) / (2.0 * kWindowSigma * kWindowSigma));
      w[(y + r) * kWindow + (x + r)] = v;
      sum += v;
    }
  }
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

double mse(const Frame& a, const Frame& b) {
  check_same_dims(a, b);
  const auto da = a.data();
  const auto db = b.data();
  double acc = 0.0;
  for (size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    acc += d * d;
  }
  return acc / static_cast<double>(da.size());
}

double psnr_from_mse(double value) {
  if (value <= 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(255.0 * 255.0 / value));
}

double psnr(const Frame& a, const Frame& b) { return psnr_from_mse(mse(a, b)); }

double ssim(const Frame& a, const Frame& b) {
  check_same_dims(a, b);
  if (a.width() < kWindow || a.height() < kWindow) {
    throw Error(ErrorCode::kShapeError,
                "SSIM needs frames of at least 11x11 pixels");
  }
  static const std::vector<double> weights = window_weights();
  const int out_w = a.width() - kWindow + 1;
  const int out_h = a.height() - kWindow + 1;
  double channel_sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    double window_sum = 0.0;
    for (int oy = 0; oy < out_h; ++oy) {
      for (int ox = 0; ox < out_w; ++ox) {
        double mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
        for (int wy = 0; wy < kWindow; ++wy) {
          for (int wx = 0; wx < kWindow; ++wx) {
            const double w = weights[wy * kWindow + wx];
            const double x = a.at(ox + wx, oy + wy, c);
            const double y = b.at(ox + wx, oy + wy, c);
            mx += w * x;
            my += w * y;
            mxx += w * (x * x);
            myy += w * (y * y);
            mxy += w * (x * y);
          }
        }
        const double vx = mxx - mx * mx;
        const double vy = myy - my * my;
        const double cov = mxy - mx * my;
        window_sum += ((2.0 * (mx * my) + kC1) * (2.0 * cov + kC2)) /
                      ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      }
    }
    channel_sum += window_sum / (static_cast<double>(out_w) * out_h);
  }
  return channel_sum / 3.0;
}

void QualityReport::add(const FrameQuality& q) { frames.push_back(q); }

void QualityReport::finalize() {
  mean_mse = mean_psnr_db = mean_ssim = 0.0;
  if (frames.empty()) return;
  for (const FrameQuality& q : frames) {
    mean_mse += q.mse;
    mean_psnr_db += q.psnr_db;
    mean_ssim += q.ssim;
  }
  const double count = static_cast<double>(frames.size());
  mean_mse /= count;
  mean_psnr_db /= count;
  mean_ssim /= count;
}

QualityReport evaluate(const std::vector<Frame>& reference,
                       const std::vector<Frame>& test) {
  if (reference.size() != test.size()) {
    throw Error(ErrorCode::kShapeError, "frame counts differ");
  }
  QualityReport report;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double m = mse(reference[i], test[i]);
    report.add({m, psnr_from_mse(m), ssim(reference[i], test[i])});
  }
  report.finalize();
  return report;
}

}  // namespace cadm
