#ifndef CADM_PIPELINE_H_
#define CADM_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cadm/bitstream.h"
#include "cadm/checkpoint.h"
#include "cadm/color_quant.h"
#include "cadm/denoiser.h"
#include "cadm/diffusion.h"
#include "cadm/encoder.h"
#include "cadm/frame.h"
#include "cadm/metrics.h"

namespace cadm {

// Runs fn(i) for i in [0, count) on up to |threads| workers. Work items
// must be independent; results are written by index.
void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn);

// ---------------------------------------------------------------------------
// Encode / decode

struct EncodeOptions {
  EncoderConfig config;
  size_t sample_count = kDefaultSampleCount;
  KMeansOptions kmeans;
  uint64_t seed = 0;
  int threads = 1;
};

// downscale -> fit one codebook per video -> quantize -> pack.
// Throws InputError on mixed frame sizes or dimensions beyond 65535.
CompressedVideo encode_video(const VideoSequence& video, const EncodeOptions& options);

struct EncodeStats {
  size_t payload_bytes = 0;
  size_t total_bytes = 0;
  size_t raw_bytes = 0;  // 24-bit full-resolution frames
  double bitrate_kbps = 0.0;
  double payload_ratio = 0.0;  // raw / payload
  double file_ratio = 0.0;     // raw / total
};
EncodeStats encode_stats(const CompressedVideo& video);

// Dequantized frames at the decoded (downscaled) resolution.
std::vector<Frame> decode_lowres(const CompressedVideo& video);

// Bilinear upscale by s, cropped back to the original dimensions.
Frame upscale_to_original(const Frame& lowres, const ContainerHeader& header);

// Non-neural reference decoder: dequantize + bilinear upscale.
std::vector<Frame> baseline_restore(const CompressedVideo& video, int threads = 1);

// ---------------------------------------------------------------------------
// Training / restoration

template <typename Real>
struct TrainingPair {
  Planes<Real> x0;         // original frame in [-1, 1]
  Planes<Real> condition;  // baseline reconstruction in [-1, 1]
};

template <typename Real>
std::vector<TrainingPair<Real>> make_training_pairs(const VideoSequence& original,
                                                    const CompressedVideo& encoded);

struct TrainOptions {
  Architecture arch;
  int steps = 3000;
  int batch = 16;
  double lr = 1e-3;
  uint64_t seed = 0;
  // Called every |log_every| steps with the step number and mean loss.
  int log_every = 0;
  std::function<void(int, double)> on_progress;
};

template <typename Real>
struct TrainResult {
  DenoiserParams<Real> params;
  std::vector<double> losses;  // per-step pre-update loss
};

// Throws NumericalDivergence if the loss becomes non-finite.
template <typename Real>
TrainResult<Real> train_denoiser(const std::vector<TrainingPair<Real>>& pairs,
                                 const NoiseSchedule& schedule,
                                 const TrainOptions& options);

struct RestoreOptions {
  SigmaMode mode = SigmaMode::kZero;
  uint64_t seed = 0;  // frame i uses derive_seed(seed, i)
  int threads = 1;
};

template <typename Real>
std::vector<Frame> restore_video(const CompressedVideo& video,
                                 const DenoiserParams<Real>& params,
                                 const NoiseSchedule& schedule,
                                 const RestoreOptions& options);

// Throws ConditionMismatch when the checkpoint was trained for another (s, n).
void check_condition_match(const Checkpoint& ckpt, const ContainerHeader& header);

// ---------------------------------------------------------------------------
// Rate-distortion sweep

struct SweepConfig {
  std::vector<int> s_values{2, 4};
  std::vector<int> n_values{4, 6, 8};
  int schedule_steps = 50;
  std::optional<double> beta_start;  // unset: default range scaled to T
  std::optional<double> beta_end;
  TrainOptions train;
  RestoreOptions restore;
  size_t sample_count = kDefaultSampleCount;
  uint64_t seed = 0;
  bool parallel_cells = false;
  int threads = 1;

  // Throws InvalidConfig on an empty or out-of-range grid.
  void validate() const;
  NoiseSchedule schedule() const;
};

struct SweepRow {
  int s = 0;
  int n = 0;
  double bitrate_kbps = 0.0;
  size_t file_bytes = 0;  // summed over evaluation containers
  double psnr_baseline = 0.0;
  double ssim_baseline = 0.0;
  std::optional<double> psnr_restored;  // unset when training diverged
  std::optional<double> ssim_restored;
  double train_seconds = 0.0;
};

inline constexpr const char* kSweepCsvHeader =
    "s,n,bitrate_kbps,file_bytes,psnr_baseline,ssim_baseline,psnr_restored,"
    "ssim_restored,train_seconds";

template <typename Real>
std::vector<SweepRow> run_sweep(const SweepConfig& config,
                                const std::vector<VideoSequence>& train,
                                const std::vector<VideoSequence>& eval);

std::string sweep_csv(const std::vector<SweepRow>& rows);

// ---------------------------------------------------------------------------
// Uplink feasibility

inline constexpr int kUplinkScaleGrid[] = {1, 2, 3, 4, 5, 6, 7, 8};
inline constexpr int kUplinkDepthGrid[] = {4, 5, 6, 7, 8};

struct GridPoint {
  int s;
  int n;
  double bitrate_kbps;
};

struct UplinkVerdict {
  double bitrate_kbps = 0.0;
  double capacity_kbps = 0.0;
  bool feasible = false;
  std::vector<GridPoint> feasible_grid;
};

// Throws InvalidArgument unless capacity_kbps > 0.
UplinkVerdict uplink_check(const ContainerHeader& header, double capacity_kbps);

// key=value lines describing a container header.
std::string describe_header(const ContainerHeader& header);

}  // namespace cadm

#endif  // CADM_PIPELINE_H_
