#ifndef CADM_SYNTHETIC_H_
#define CADM_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cadm/frame.h"

namespace cadm {

struct SyntheticOptions {
  int sequences = 8;
  int frames = 16;
  int size = 32;  // square frames, >= 16
  uint64_t seed = 0;
};

// One clip: a drifting two-color linear gradient with 2-4 anti-aliased
// rectangles bouncing across it at sub-pixel velocities.
std::vector<Frame> synthesize_sequence(int frames, int size, uint64_t seed);

// Sequence i uses derive_seed(options.seed, i).
std::vector<std::vector<Frame>> synthesize_dataset(const SyntheticOptions& options);

// Writes <root>/seq_%03d/frame_%06d.ppm. Returns the sequence directories.
std::vector<std::filesystem::path> write_synthetic_dataset(
    const std::filesystem::path& root, const SyntheticOptions& options);

}  // namespace cadm

#endif  // CADM_SYNTHETIC_H_
