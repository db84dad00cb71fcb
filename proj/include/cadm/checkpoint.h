#ifndef CADM_CHECKPOINT_H_
#define CADM_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cadm/denoiser.h"
#include "cadm/diffusion.h"

namespace cadm {

// Model checkpoint, little-endian:
//
//   offset  size  field
//        0     4  magic "CDMK"
//        4     1  version (1)
//        5     1  s the model was trained for
//        6     1  n the model was trained for
//        7     1  reserved (0)
//        8     4  hidden width
//       12     4  embedding dimension
//       16     4  schedule steps T
//       20     8  beta_start (IEEE-754 binary64)
//       28     8  beta_end (IEEE-754 binary64)
//       36     8  skip prior variance (IEEE-754 binary64)
//       44     4  parameter count P
//       48   4*P  parameters (IEEE-754 binary32)
inline constexpr uint8_t kCheckpointVersion = 1;

struct Checkpoint {
  int s = 1;
  int n = 1;
  Architecture arch;
  int steps = 0;
  double beta_start = 0.0;
  double beta_end = 0.0;
  std::vector<float> params;

  NoiseSchedule schedule() const {
    return make_schedule(steps, beta_start, beta_end);
  }
  template <typename Real>
  DenoiserParams<Real> denoiser() const {
    DenoiserParams<Real> out;
    out.arch = arch;
    out.values.assign(params.begin(), params.end());
    return out;
  }
};

template <typename Real>
Checkpoint make_checkpoint(const DenoiserParams<Real>& params,
                           const NoiseSchedule& schedule, int s, int n) {
  Checkpoint ckpt;
  ckpt.s = s;
  ckpt.n = n;
  ckpt.arch = params.arch;
  ckpt.steps = schedule.steps;
  ckpt.beta_start = schedule.beta_start;
  ckpt.beta_end = schedule.beta_end;
  ckpt.params.assign(params.values.begin(), params.values.end());
  return ckpt;
}

std::vector<uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
// Throws CorruptData, UnsupportedVersion or InvalidSchedule.
Checkpoint deserialize_checkpoint(std::span<const uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cadm

#endif  // CADM_CHECKPOINT_H_
