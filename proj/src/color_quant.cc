#include "cadm/color_quant.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "cadm/error.h"
#include "cadm/rng.h"

namespace cadm {

void Codebook::validate() const {
  if (n < 1 || n > 8) {
    throw Error(ErrorCode::kInvalidConfig,
                "codebook bit-depth must be in [1, 8], got " +
                    std::to_string(n));
  }
  if (centroids.size() != (size_t{1} << n)) {
    throw Error(ErrorCode::kInvalidConfig,
                "codebook has " + std::to_string(centroids.size()) +
                    " centroids, expected 2^" + std::to_string(n));
  }
}

uint64_t hash_pixels(std::span<const Rgb> pixels) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const Rgb& p : pixels) {
    for (uint8_t b : p) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::vector<Rgb> sample_pixels(std::span<const Frame> frames, size_t count,
                               uint64_t seed) {
  size_t total = 0;
  for (const Frame& f : frames) total += f.pixel_count();
  if (total == 0) {
    throw Error(ErrorCode::kEmptyInput, "cannot sample an empty video");
  }
  std::vector<size_t> chosen;
  if (total <= count) {
    chosen.resize(total);
    for (size_t i = 0; i < total; ++i) chosen[i] = i;
  } else {
    // Floyd's algorithm: exactly |count| distinct positions.
    Rng rng(seed);
    std::unordered_set<size_t> picked;
    picked.reserve(count * 2);
    for (size_t j = total - count; j < total; ++j) {
      const size_t t = rng.uniform_int(j + 1);
      if (!picked.insert(t).second) picked.insert(j);
    }
    chosen.assign(picked.begin(), picked.end());
    std::sort(chosen.begin(), chosen.end());
  }

  std::vector<Rgb> out;
  out.reserve(chosen.size());
  size_t frame_index = 0;
  size_t frame_base = 0;
  for (size_t pos : chosen) {
    while (pos >= frame_base + frames[frame_index].pixel_count()) {
      frame_base += frames[frame_index].pixel_count();
      ++frame_index;
    }
    const auto d =
        frames[frame_index].data().subspan((pos - frame_base) * 3, 3);
    out.push_back(Rgb{d[0], d[1], d[2]});
  }
  return out;
}

std::vector<Rgb> sample_pixels(const VideoSequence& video, size_t count,
                               uint64_t seed) {
  if (video.frames.empty()) {
    throw Error(ErrorCode::kEmptyInput, "video has no frames");
  }
  return sample_pixels(std::span<const Frame>(video.frames), count, seed);
}

namespace {

using Point = std::array<double, 3>;

double squared_distance(const Rgb& a, const Point& b) {
  double d = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double diff = a[c] - b[c];
    d += diff * diff;
  }
  return d;
}

Point to_point(const Rgb& p) { return {double(p[0]), double(p[1]), double(p[2])}; }

// Index of the nearest center, lowest index on ties.
size_t assign(const Rgb& p, const std::vector<Point>& centers, double* dist) {
  size_t best = 0;
  double best_d = squared_distance(p, centers[0]);
  for (size_t j = 1; j < centers.size(); ++j) {
    const double d = squared_distance(p, centers[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

// k-means++: first center uniform, then proportional to squared distance
// from the nearest chosen center. Falls back to a uniform pick when every
// sample already coincides with a center.
std::vector<Point> kmeanspp_init(std::span<const Rgb> samples, size_t k,
                                 Rng& rng) {
  std::vector<Point> centers;
  centers.reserve(k);
  centers.push_back(to_point(samples[rng.uniform_int(samples.size())]));
  std::vector<double> d2(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    d2[i] = squared_distance(samples[i], centers[0]);
  }
  while (centers.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = samples.size() - 1;
      for (size_t i = 0; i < samples.size(); ++i) {
        acc += d2[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_int(samples.size());
    }
    centers.push_back(to_point(samples[pick]));
    for (size_t i = 0; i < samples.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(samples[i], centers.back()));
    }
  }
  return centers;
}

}  // namespace

Codebook fit_codebook(std::span<const Rgb> samples, int n, uint64_t seed,
                      const KMeansOptions& options, KMeansTrace* trace) {
  if (samples.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no samples to fit a codebook");
  }
  if (n < 1 || n > 8) {
    throw Error(ErrorCode::kInvalidConfig,
                "bit-depth must be in [1, 8], got " + std::to_string(n));
  }
  const size_t k = size_t{1} << n;
  Rng rng(seed);
  std::vector<Point> centers = kmeanspp_init(samples, k, rng);

  std::vector<size_t> labels(samples.size());
  std::vector<double> dist(samples.size());
  int iterations = 0;
  for (int iter = 0; iter < options.max_iters; ++iter) {
    ++iterations;
    double inertia = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
      labels[i] = assign(samples[i], centers, &dist[i]);
      inertia += dist[i];
    }
    if (trace) trace->inertia.push_back(inertia);

    std::vector<Point> sums(k, Point{0.0, 0.0, 0.0});
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < samples.size(); ++i) {
      for (int c = 0; c < 3; ++c) sums[labels[i]][c] += samples[i][c];
      ++counts[labels[i]];
    }
    std::vector<Point> updated(k);
    std::vector<bool> taken(samples.size(), false);
    for (size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        for (int c = 0; c < 3; ++c) updated[j][c] = sums[j][c] / counts[j];
        continue;
      }
      // Empty cluster: re-seed at the sample farthest from its centroid.
      size_t far = samples.size();
      double far_d = -1.0;
      for (size_t i = 0; i < samples.size(); ++i) {
        if (!taken[i] && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      if (far == samples.size()) {
        updated[j] = centers[j];
      } else {
        taken[far] = true;
        updated[j] = to_point(samples[far]);
      }
    }
    double max_move = 0.0;
    for (size_t j = 0; j < k; ++j) {
      double d = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double diff = updated[j][c] - centers[j][c];
        d += diff * diff;
      }
      max_move = std::max(max_move, std::sqrt(d));
    }
    centers = std::move(updated);
    if (max_move < options.tol) break;
  }

  Codebook book;
  book.n = n;
  book.source_hash = hash_pixels(samples);
  book.centroids.reserve(k);
  for (const Point& p : centers) {
    book.centroids.push_back(
        Rgb{round_to_u8(p[0]), round_to_u8(p[1]), round_to_u8(p[2])});
  }
  std::sort(book.centroids.begin(), book.centroids.end());

  if (trace) {
    trace->iterations = iterations;
    trace->assignments.resize(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
      trace->assignments[i] = nearest_centroid(book, samples[i]);
    }
  }
  return book;
}

namespace {

// Linear scan returning the first index at minimal distance. Entries whose
// red gap alone exceeds the best distance cannot win or tie; when the
// centroids are sorted (as fit_codebook leaves them) the scan also stops at
// the first such entry past the pixel's red value.
uint16_t nearest_scan(const std::vector<Rgb>& centroids, const Rgb& pixel,
                      bool sorted) {
  uint16_t best = 0;
  int best_d = std::numeric_limits<int>::max();
  for (size_t j = 0; j < centroids.size(); ++j) {
    const Rgb& c = centroids[j];
    const int dr = int(pixel[0]) - c[0];
    if (dr * dr > best_d) {
      if (sorted && dr < 0) break;
      continue;
    }
    const int dg = int(pixel[1]) - c[1];
    const int db = int(pixel[2]) - c[2];
    const int d = dr * dr + dg * dg + db * db;
    if (d < best_d) {
      best_d = d;
      best = static_cast<uint16_t>(j);
    }
  }
  return best;
}

}  // namespace

uint16_t nearest_centroid(const Codebook& codebook, const Rgb& pixel) {
  return nearest_scan(codebook.centroids, pixel, false);
}

QuantizedFrame quantize_frame(const Frame& frame, const Codebook& codebook) {
  codebook.validate();
  QuantizedFrame q;
  q.width = frame.width();
  q.height = frame.height();
  q.n = codebook.n;
  q.indices.resize(frame.pixel_count());
  const bool sorted =
      std::is_sorted(codebook.centroids.begin(), codebook.centroids.end());
  const auto data = frame.data();
  for (size_t i = 0; i < q.indices.size(); ++i) {
    q.indices[i] = nearest_scan(
        codebook.centroids, Rgb{data[3 * i], data[3 * i + 1], data[3 * i + 2]},
        sorted);
  }
  return q;
}

Frame dequantize_frame(const QuantizedFrame& qframe, const Codebook& codebook) {
  if (qframe.indices.size() !=
      static_cast<size_t>(qframe.width) * static_cast<size_t>(qframe.height)) {
    throw Error(ErrorCode::kCorruptData, "index plane size mismatch");
  }
  Frame out(qframe.width, qframe.height);
  auto data = out.data();
  for (size_t i = 0; i < qframe.indices.size(); ++i) {
    const uint16_t idx = qframe.indices[i];
    if (idx >= codebook.centroids.size()) {
      throw Error(ErrorCode::kCorruptData,
                  "index " + std::to_string(idx) + " outside codebook of " +
                      std::to_string(codebook.centroids.size()));
    }
    const Rgb& c = codebook.centroids[idx];
    data[3 * i] = c[0];
    data[3 * i + 1] = c[1];
    data[3 * i + 2] = c[2];
  }
  return out;
}

}  // namespace cadm
