#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cadm/bitstream.h"
#include "cadm/checkpoint.h"
#include "cadm/error.h"
#include "cadm/frame_io.h"
#include "cadm/metrics.h"
#include "cadm/pipeline.h"
#include "cadm/rng.h"
#include "cadm/synthetic.h"

namespace fs = std::filesystem;
using namespace cadm;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitDivergence = 3;

struct Globals {
  uint64_t seed = 0;
  int threads = 1;
  std::string precision = "f32";
};

struct DiffusionFlags {
  int steps = 50;
  std::optional<double> beta_start;
  std::optional<double> beta_end;
  std::string sigma_mode = "zero";

  NoiseSchedule schedule() const {
    if (!beta_start && !beta_end) return make_scaled_schedule(steps);
    return make_schedule(steps, beta_start.value_or(kDefaultBetaStart),
                         beta_end.value_or(kDefaultBetaEnd));
  }
};

void add_diffusion_flags(CLI::App* cmd, DiffusionFlags& f, bool with_sigma) {
  cmd->add_option("--steps", f.steps, "Diffusion steps T")->capture_default_str();
  cmd->add_option("--beta-start", f.beta_start,
                  "First beta (default: 1e-4 scaled by 1000/T)");
  cmd->add_option("--beta-end", f.beta_end,
                  "Last beta (default: 0.02 scaled by 1000/T)");
  if (with_sigma) {
    cmd->add_option("--sigma-mode", f.sigma_mode, "Reverse-step noise")
        ->check(CLI::IsMember({"inflated", "standard", "zero"}))
        ->capture_default_str();
  }
}

struct TrainFlags {
  int iters = 3000;
  int batch = 16;
  double lr = 1e-3;
  int hidden = 32;
  int embed_dim = 32;
  double prior_variance = 0.005;
  int log_every = 100;

  TrainOptions options(uint64_t seed) const {
    TrainOptions t;
    t.arch = Architecture{.hidden = hidden, .embed_dim = embed_dim,
                          .prior_variance = prior_variance};
    t.arch.validate();
    t.steps = iters;
    t.batch = batch;
    t.lr = lr;
    t.seed = seed;
    t.log_every = log_every;
    if (log_every > 0) {
      t.on_progress = [](int step, double loss) {
        std::fprintf(stderr, "step %d  loss %.6f\n", step, loss);
      };
    }
    return t;
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--iters", f.iters, "Optimizer steps")->capture_default_str();
  cmd->add_option("--batch", f.batch, "Frames per step")->capture_default_str();
  cmd->add_option("--lr", f.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--hidden", f.hidden, "Hidden channels")->capture_default_str();
  cmd->add_option("--embed-dim", f.embed_dim, "Timestep embedding size")
      ->capture_default_str();
  cmd->add_option("--prior-variance", f.prior_variance,
                  "Variance assumed around the condition by the skip path")
      ->capture_default_str();
  cmd->add_option("--log-every", f.log_every, "Loss report interval, 0 = quiet")
      ->capture_default_str();
}

// A root holding seq_* directories, or a single directory of frames.
std::vector<VideoSequence> load_videos(const fs::path& root, Rational fps = {}) {
  std::vector<VideoSequence> out;
  auto dirs = list_sequence_dirs(root);
  if (dirs.empty()) dirs.push_back(root);
  for (const auto& d : dirs) out.push_back(read_sequence(d, fps));
  return out;
}

CompressedVideo load_container(const fs::path& path) {
  return deserialize(read_file(path));
}

void write_metrics_csv(const fs::path& path, const QualityReport& report) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  os << "frame,mse,psnr_db,ssim\n";
  char buf[128];
  for (size_t i = 0; i < report.frames.size(); ++i) {
    const FrameQuality& q = report.frames[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.8f\n", i, q.mse, q.psnr_db, q.ssim);
    os << buf;
  }
}

void report_quality(const std::vector<Frame>& frames,
                    const std::optional<fs::path>& reference,
                    const std::optional<fs::path>& csv) {
  if (!reference) return;
  const VideoSequence ref = read_sequence(*reference);
  const QualityReport q = evaluate(ref.frames, frames);
  std::printf("mean_mse=%.6f\nmean_psnr_db=%.6f\nmean_ssim=%.8f\n", q.mean_mse,
              q.mean_psnr_db, q.mean_ssim);
  if (csv) write_metrics_csv(*csv, q);
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------

struct GenDataCmd {
  fs::path output;
  SyntheticOptions opts;

  void run(const Globals& g) {
    opts.seed = g.seed;
    const auto dirs = write_synthetic_dataset(output, opts);
    std::printf("wrote %zu sequences x %d frames (%dx%d) to %s\n", dirs.size(),
                opts.frames, opts.size, opts.size, output.string().c_str());
  }
};

struct EncodeCmd {
  fs::path input;
  fs::path output;
  int s = 4;
  int n = 4;
  std::optional<double> blur_sigma;
  size_t samples = kDefaultSampleCount;
  uint32_t fps_num = 30;
  uint32_t fps_den = 1;

  void run(const Globals& g) {
    const VideoSequence video = read_sequence(input, {fps_num, fps_den});
    EncodeOptions opts;
    opts.config = EncoderConfig{.s = s, .n = n, .blur_sigma = blur_sigma};
    opts.sample_count = samples;
    opts.seed = g.seed;
    opts.threads = g.threads;
    const CompressedVideo c = encode_video(video, opts);
    write_file(output, serialize(c));
    const EncodeStats st = encode_stats(c);
    std::printf("frames=%u\npayload_bytes=%zu\ntotal_bytes=%zu\nraw_bytes=%zu\n"
                "bitrate_kbps=%.3f\npayload_ratio=%.4f\nfile_ratio=%.4f\n",
                c.header.frame_count, st.payload_bytes, st.total_bytes,
                st.raw_bytes, st.bitrate_kbps, st.payload_ratio, st.file_ratio);
  }
};

struct DecodeCmd {
  fs::path input;
  fs::path output;

  void run(const Globals&) {
    write_sequence(output, decode_lowres(load_container(input)));
  }
};

struct BaselineCmd {
  fs::path input;
  fs::path output;
  std::optional<fs::path> reference;
  std::optional<fs::path> metrics_csv;

  void run(const Globals& g) {
    const auto frames = baseline_restore(load_container(input), g.threads);
    write_sequence(output, frames);
    report_quality(frames, reference, metrics_csv);
  }
};

struct TrainCmd {
  fs::path data;
  fs::path output;
  int s = 2;
  int n = 4;
  size_t samples = kDefaultSampleCount;
  TrainFlags train;
  DiffusionFlags diffusion;

  template <typename Real>
  void run_typed(const Globals& g) {
    const auto videos = load_videos(data);
    EncodeOptions enc;
    enc.config = EncoderConfig{.s = s, .n = n, .blur_sigma = std::nullopt};
    enc.sample_count = samples;
    enc.threads = g.threads;
    std::vector<TrainingPair<Real>> pairs;
    for (size_t i = 0; i < videos.size(); ++i) {
      enc.seed = derive_seed(g.seed, 100 + i);
      auto p = make_training_pairs<Real>(videos[i], encode_video(videos[i], enc));
      std::move(p.begin(), p.end(), std::back_inserter(pairs));
    }
    const NoiseSchedule schedule = diffusion.schedule();
    const auto start = std::chrono::steady_clock::now();
    const auto result =
        train_denoiser(pairs, schedule, train.options(derive_seed(g.seed, 1)));
    save_checkpoint(output, make_checkpoint(result.params, schedule, s, n));
    std::printf("frames=%zu\nparams=%zu\ntrain_seconds=%.3f\n", pairs.size(),
                result.params.size(), elapsed_since(start));
  }

  void run(const Globals& g) {
    if (g.precision == "f64") {
      run_typed<double>(g);
    } else {
      run_typed<float>(g);
    }
  }
};

struct RestoreCmd {
  fs::path input;
  fs::path checkpoint;
  fs::path output;
  std::string sigma_mode = "zero";
  std::optional<fs::path> reference;
  std::optional<fs::path> metrics_csv;

  template <typename Real>
  std::vector<Frame> run_typed(const Globals& g, const CompressedVideo& c,
                               const Checkpoint& ckpt) {
    RestoreOptions opts;
    opts.mode = parse_sigma_mode(sigma_mode);
    opts.seed = g.seed;
    opts.threads = g.threads;
    return restore_video(c, ckpt.denoiser<Real>(), ckpt.schedule(), opts);
  }

  void run(const Globals& g) {
    const CompressedVideo c = load_container(input);
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    check_condition_match(ckpt, c.header);
    const auto frames = g.precision == "f64" ? run_typed<double>(g, c, ckpt)
                                             : run_typed<float>(g, c, ckpt);
    write_sequence(output, frames);
    report_quality(frames, reference, metrics_csv);
  }
};

struct SweepCmd {
  fs::path data;
  fs::path output;
  size_t eval_count = 2;
  std::vector<int> s_values{2, 4};
  std::vector<int> n_values{4, 6, 8};
  size_t samples = kDefaultSampleCount;
  bool parallel_cells = false;
  TrainFlags train;
  DiffusionFlags diffusion;

  void run(const Globals& g) {
    auto videos = load_videos(data);
    if (videos.size() <= eval_count) {
      throw Error(ErrorCode::kInputError,
                  "need more sequences than --eval-count (" +
                      std::to_string(videos.size()) + " found)");
    }
    std::vector<VideoSequence> eval(videos.end() - eval_count, videos.end());
    videos.resize(videos.size() - eval_count);

    SweepConfig cfg;
    cfg.s_values = s_values;
    cfg.n_values = n_values;
    cfg.schedule_steps = diffusion.steps;
    cfg.beta_start = diffusion.beta_start;
    cfg.beta_end = diffusion.beta_end;
    cfg.train = train.options(0);
    cfg.train.on_progress = nullptr;
    cfg.restore.mode = parse_sigma_mode(diffusion.sigma_mode);
    cfg.sample_count = samples;
    cfg.seed = g.seed;
    cfg.parallel_cells = parallel_cells;
    cfg.threads = g.threads;
    const auto rows = g.precision == "f64" ? run_sweep<double>(cfg, videos, eval)
                                           : run_sweep<float>(cfg, videos, eval);
    const std::string csv = sweep_csv(rows);
    write_file(output, std::vector<uint8_t>(csv.begin(), csv.end()));

    std::printf("s,n,bitrate_kbps");
    for (const auto& ref : kReferenceBitrates) std::printf(",x_vs_%s", ref.label);
    std::printf("\n");
    for (const SweepRow& r : rows) {
      std::printf("%d,%d,%.3f", r.s, r.n, r.bitrate_kbps);
      for (const auto& ref : kReferenceBitrates) {
        std::printf(",%.4f", reduction_vs_reference(r.bitrate_kbps, ref.kbps));
      }
      std::printf("\n");
    }
  }
};

struct InspectCmd {
  fs::path input;

  void run(const Globals&) {
    const CompressedVideo c = load_container(input);
    std::printf("%s", describe_header(c.header).c_str());
    const EncodeStats st = encode_stats(c);
    std::printf("payload_bytes=%zu\ntotal_bytes=%zu\npayload_ratio=%.4f\n",
                st.payload_bytes, st.total_bytes, st.payload_ratio);
  }
};

struct UplinkCmd {
  std::optional<fs::path> input;
  int width = 1920;
  int height = 1080;
  int s = 1;
  int n = 8;
  uint32_t fps_num = 30;
  uint32_t fps_den = 1;
  double capacity = 0.0;

  void run(const Globals&) {
    ContainerHeader h;
    if (input) {
      h = load_container(*input).header;
    } else {
      EncoderConfig{.s = s, .n = n, .blur_sigma = std::nullopt}.validate();
      if (width < 1 || height < 1 || width > 0xFFFF || height > 0xFFFF ||
          fps_num < 1 || fps_den < 1 || fps_num > 0xFFFF || fps_den > 0xFFFF) {
        throw Error(ErrorCode::kInputError, "dimensions and fps must fit in u16");
      }
      h.orig_width = static_cast<uint16_t>(width);
      h.orig_height = static_cast<uint16_t>(height);
      h.s = static_cast<uint8_t>(s);
      h.n = static_cast<uint8_t>(n);
      h.fps_num = static_cast<uint16_t>(fps_num);
      h.fps_den = static_cast<uint16_t>(fps_den);
    }
    const UplinkVerdict v = uplink_check(h, capacity);
    std::printf("bitrate_kbps=%.3f\ncapacity_kbps=%.3f\nfeasible=%s\n",
                v.bitrate_kbps, v.capacity_kbps, v.feasible ? "yes" : "no");
    std::printf("feasible_grid=%zu\n", v.feasible_grid.size());
    for (const GridPoint& p : v.feasible_grid) {
      std::printf("  s=%d n=%d bitrate_kbps=%.3f\n", p.s, p.n, p.bitrate_kbps);
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Color-quantized, downscaled video codec with a diffusion restorer"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--precision", g.precision, "Network arithmetic")
      ->check(CLI::IsMember({"f32", "f64"}))
      ->capture_default_str();

  GenDataCmd gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic PPM dataset");
  gen_cmd->add_option("-o,--output", gen.output, "Output root")->required();
  gen_cmd->add_option("--sequences", gen.opts.sequences)->capture_default_str();
  gen_cmd->add_option("--frames", gen.opts.frames)->capture_default_str();
  gen_cmd->add_option("--size", gen.opts.size, "Square frame size")->capture_default_str();

  EncodeCmd enc;
  auto* enc_cmd = app.add_subcommand("encode", "Compress a directory of frames");
  enc_cmd->add_option("-i,--input", enc.input, "Frame directory")->required();
  enc_cmd->add_option("-o,--output", enc.output, "Container path")->required();
  enc_cmd->add_option("-s,--scale", enc.s, "Downscale factor")->capture_default_str();
  enc_cmd->add_option("-n,--bits", enc.n, "Index bits per pixel")->capture_default_str();
  enc_cmd->add_option("--blur-sigma", enc.blur_sigma, "Anti-alias blur (default s/2)");
  enc_cmd->add_option("--samples", enc.samples, "Pixels sampled for k-means")
      ->capture_default_str();
  enc_cmd->add_option("--fps-num", enc.fps_num)->capture_default_str();
  enc_cmd->add_option("--fps-den", enc.fps_den)->capture_default_str();

  DecodeCmd dec;
  auto* dec_cmd = app.add_subcommand("decode", "Write dequantized low-resolution frames");
  dec_cmd->add_option("-i,--input", dec.input, "Container path")->required();
  dec_cmd->add_option("-o,--output", dec.output, "Output directory")->required();

  BaselineCmd base;
  auto* base_cmd = app.add_subcommand("baseline", "Dequantize and bilinear-upscale");
  base_cmd->add_option("-i,--input", base.input, "Container path")->required();
  base_cmd->add_option("-o,--output", base.output, "Output directory")->required();
  base_cmd->add_option("--reference", base.reference, "Original frames for metrics");
  base_cmd->add_option("--metrics-csv", base.metrics_csv, "Per-frame metrics output");

  TrainCmd train;
  auto* train_cmd = app.add_subcommand("train", "Train a denoiser for one (s, n)");
  train_cmd->add_option("-d,--data", train.data, "Dataset root")->required();
  train_cmd->add_option("-o,--output", train.output, "Checkpoint path")->required();
  train_cmd->add_option("-s,--scale", train.s)->capture_default_str();
  train_cmd->add_option("-n,--bits", train.n)->capture_default_str();
  train_cmd->add_option("--samples", train.samples)->capture_default_str();
  add_train_flags(train_cmd, train.train);
  add_diffusion_flags(train_cmd, train.diffusion, false);

  RestoreCmd restore;
  auto* restore_cmd = app.add_subcommand("restore", "Restore frames with a checkpoint");
  restore_cmd->add_option("-i,--input", restore.input, "Container path")->required();
  restore_cmd->add_option("-c,--checkpoint", restore.checkpoint)->required();
  restore_cmd->add_option("-o,--output", restore.output, "Output directory")->required();
  restore_cmd->add_option("--sigma-mode", restore.sigma_mode, "Reverse-step noise")
      ->check(CLI::IsMember({"inflated", "standard", "zero"}))
      ->capture_default_str();
  restore_cmd->add_option("--reference", restore.reference, "Original frames for metrics");
  restore_cmd->add_option("--metrics-csv", restore.metrics_csv, "Per-frame metrics output");

  SweepCmd sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Rate-distortion sweep over (s, n)");
  sweep_cmd->add_option("-d,--data", sweep.data, "Dataset root")->required();
  sweep_cmd->add_option("-o,--output", sweep.output, "CSV path")->required();
  sweep_cmd->add_option("--eval-count", sweep.eval_count,
                        "Trailing sequences held out for evaluation")
      ->capture_default_str();
  sweep_cmd->add_option("--s-values", sweep.s_values)->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--n-values", sweep.n_values)->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--samples", sweep.samples)->capture_default_str();
  sweep_cmd->add_flag("--parallel-cells", sweep.parallel_cells,
                      "Run grid cells concurrently on --threads workers");
  add_train_flags(sweep_cmd, sweep.train);
  add_diffusion_flags(sweep_cmd, sweep.diffusion, true);

  InspectCmd inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print a container header");
  inspect_cmd->add_option("input", inspect.input, "Container path")->required();

  UplinkCmd uplink;
  auto* uplink_cmd = app.add_subcommand("uplink-check", "Check a bitrate against a budget");
  uplink_cmd->add_option("-i,--input", uplink.input, "Container to read settings from");
  uplink_cmd->add_option("--width", uplink.width)->capture_default_str();
  uplink_cmd->add_option("--height", uplink.height)->capture_default_str();
  uplink_cmd->add_option("-s,--scale", uplink.s)->capture_default_str();
  uplink_cmd->add_option("-n,--bits", uplink.n)->capture_default_str();
  uplink_cmd->add_option("--fps-num", uplink.fps_num)->capture_default_str();
  uplink_cmd->add_option("--fps-den", uplink.fps_den)->capture_default_str();
  uplink_cmd->add_option("--capacity", uplink.capacity, "Uplink capacity in Kbps")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*gen_cmd) gen.run(g);
    if (*enc_cmd) enc.run(g);
    if (*dec_cmd) dec.run(g);
    if (*base_cmd) base.run(g);
    if (*train_cmd) train.run(g);
    if (*restore_cmd) restore.run(g);
    if (*sweep_cmd) sweep.run(g);
    if (*inspect_cmd) inspect.run(g);
    if (*uplink_cmd) uplink.run(g);
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n",
                 std::string(error_code_name(e.code())).c_str(), e.what());
    return e.code() == ErrorCode::kNumericalDivergence ? kExitDivergence : kExitInput;
  }
  return 0;
}
