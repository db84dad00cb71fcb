#ifndef CADM_COLOR_QUANT_H_
#define CADM_COLOR_QUANT_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cadm/frame.h"

namespace cadm {

using Rgb = std::array<uint8_t, 3>;

// 2^n centroid colors; index i addresses centroids[i].
struct Codebook {
  int n = 0;
  std::vector<Rgb> centroids;
  uint64_t source_hash = 0;  // FNV-1a over the fitted sample bytes

  size_t size() const { return centroids.size(); }
  // Throws InvalidConfig unless centroid count is exactly 2^n.
  void validate() const;
};

struct QuantizedFrame {
  int width = 0;
  int height = 0;
  int n = 0;
  std::vector<uint16_t> indices;  // row-major
};

struct KMeansOptions {
  int max_iters = 50;
  double tol = 0.5;  // max centroid movement, u8 units
};

inline constexpr size_t kDefaultSampleCount = 4096;

// Diagnostics from one fit; used by tests and the CLI report.
struct KMeansTrace {
  std::vector<double> inertia;  // within-cluster SSE per assignment pass
  int iterations = 0;
  // Nearest-centroid index of every sample against the final codebook.
  std::vector<uint16_t> assignments;
};

uint64_t hash_pixels(std::span<const Rgb> pixels);

// Uniform sample without replacement over every pixel of every frame,
// returned in raster/frame order. Returns all pixels when the video has at
// most |count| of them. Throws EmptyInput for an empty video.
std::vector<Rgb> sample_pixels(const VideoSequence& video, size_t count,
                               uint64_t seed);
std::vector<Rgb> sample_pixels(std::span<const Frame> frames, size_t count,
                               uint64_t seed);

// Lloyd's k-means with k-means++ seeding; centroids are rounded half-up to
// u8 and sorted lexicographically.
Codebook fit_codebook(std::span<const Rgb> samples, int n, uint64_t seed,
                      const KMeansOptions& options = {},
                      KMeansTrace* trace = nullptr);

// Nearest centroid by squared distance, lowest index on ties.
uint16_t nearest_centroid(const Codebook& codebook, const Rgb& pixel);

QuantizedFrame quantize_frame(const Frame& frame, const Codebook& codebook);

// Throws CorruptData on an index outside the codebook.
Frame dequantize_frame(const QuantizedFrame& qframe, const Codebook& codebook);

}  // namespace cadm

#endif  // CADM_COLOR_QUANT_H_
