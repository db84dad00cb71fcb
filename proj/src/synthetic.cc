#include "cadm/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "cadm/error.h"
#include "cadm/frame_io.h"
#include "cadm/rng.h"

namespace cadm {
namespace {

using Color = std::array<double, 3>;

Color random_color(Rng& rng) {
  return {rng.uniform() * 255.0, rng.uniform() * 255.0, rng.uniform() * 255.0};
}

struct Rect {
  double x, y, w, h;
  double vx, vy;
  Color color;
};

// Triangle wave keeping a coordinate inside [0, span].
double bounce(double p, double span) {
  if (span <= 0.0) return 0.0;
  double m = std::fmod(p, 2.0 * span);
  if (m < 0.0) m += 2.0 * span;
  return m <= span ? m : 2.0 * span - m;
}

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

std::vector<Frame> synthesize_sequence(int frames, int size, uint64_t seed) {
  if (size < 16) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthetic frame size must be >= 16, got " + std::to_string(size));
  }
  if (frames < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one frame");
  }
  Rng rng(seed);
  const Color bg0 = random_color(rng);
  const Color bg1 = random_color(rng);
  const double angle = rng.uniform() * 2.0 * std::numbers::pi;
  const double dir_x = std::cos(angle);
  const double dir_y = std::sin(angle);
  const double drift = (rng.uniform() - 0.5) * 0.04;  // phase per frame

  const int rect_count = 2 + static_cast<int>(rng.uniform_int(3));
  std::vector<Rect> rects(rect_count);
  for (Rect& r : rects) {
    r.w = size * (0.15 + 0.35 * rng.uniform());
    r.h = size * (0.15 + 0.35 * rng.uniform());
    r.x = rng.uniform() * (size - r.w);
    r.y = rng.uniform() * (size - r.h);
    r.vx = (rng.uniform() - 0.5) * 3.0;
    r.vy = (rng.uniform() - 0.5) * 3.0;
    r.color = random_color(rng);
  }

  std::vector<Frame> out;
  out.reserve(frames);
  for (int f = 0; f < frames; ++f) {
    Frame frame(size, size);
    std::vector<std::array<double, 3>> canvas(static_cast<size_t>(size) * size);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double u = ((x + 0.5) / size - 0.5) * dir_x +
                         ((y + 0.5) / size - 0.5) * dir_y + 0.5 + drift * f;
        const double mix = std::clamp(u, 0.0, 1.0);
        auto& px = canvas[static_cast<size_t>(y) * size + x];
        for (int c = 0; c < 3; ++c) px[c] = bg0[c] + (bg1[c] - bg0[c]) * mix;
      }
    }
    for (const Rect& r : rects) {
      const double rx = bounce(r.x + r.vx * f, size - r.w);
      const double ry = bounce(r.y + r.vy * f, size - r.h);
      const int x_lo = std::max(0, static_cast<int>(std::floor(rx)));
      const int x_hi = std::min(size, static_cast<int>(std::ceil(rx + r.w)));
      const int y_lo = std::max(0, static_cast<int>(std::floor(ry)));
      const int y_hi = std::min(size, static_cast<int>(std::ceil(ry + r.h)));
      for (int y = y_lo; y < y_hi; ++y) {
        const double cy = overlap(y, y + 1.0, ry, ry + r.h);
        for (int x = x_lo; x < x_hi; ++x) {
          const double coverage = cy * overlap(x, x + 1.0, rx, rx + r.w);
          auto& px = canvas[static_cast<size_t>(y) * size + x];
          for (int c = 0; c < 3; ++c) px[c] += (r.color[c] - px[c]) * coverage;
        }
      }
    }
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const auto& px = canvas[static_cast<size_t>(y) * size + x];
        for (int c = 0; c < 3; ++c) frame.at(x, y, c) = round_to_u8(px[c]);
      }
    }
    out.push_back(std::move(frame));
  }
  return out;
}

std::vector<std::vector<Frame>> synthesize_dataset(const SyntheticOptions& options) {
  std::vector<std::vector<Frame>> out;
  out.reserve(options.sequences);
  for (int i = 0; i < options.sequences; ++i) {
    out.push_back(synthesize_sequence(options.frames, options.size,
                                      derive_seed(options.seed, i)));
  }
  return out;
}

std::vector<std::filesystem::path> write_synthetic_dataset(
    const std::filesystem::path& root, const SyntheticOptions& options) {
  std::vector<std::filesystem::path> dirs;
  const auto dataset = synthesize_dataset(options);
  for (size_t i = 0; i < dataset.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "seq_%03zu", i);
    dirs.push_back(root / name);
    write_sequence(dirs.back(), dataset[i]);
  }
  return dirs;
}

}  // namespace cadm
