#include "cadm/pipeline.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "cadm/error.h"
#include "cadm/rng.h"

namespace cadm {

void parallel_for(size_t count, int threads,
                  const std::function<void(size_t)>& fn) {
  const size_t workers =
      std::min(count, static_cast<size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

CompressedVideo encode_video(const VideoSequence& video,
                             const EncodeOptions& options) {
  options.config.validate();
  if (video.frames.empty()) {
    throw Error(ErrorCode::kInputError, "video has no frames");
  }
  video.check_uniform();
  const Frame& first = video.frames.front();
  if (first.width() > 0xFFFF || first.height() > 0xFFFF) {
    throw Error(ErrorCode::kInputError, "frame dimensions exceed 65535");
  }
  if (video.fps.num == 0 || video.fps.den == 0 || video.fps.num > 0xFFFF ||
      video.fps.den > 0xFFFF) {
    throw Error(ErrorCode::kInputError, "fps must be a positive u16 ratio");
  }

  std::vector<Frame> lowres(video.frames.size(), Frame(1, 1));
  parallel_for(video.frames.size(), options.threads, [&](size_t i) {
    lowres[i] = downscale(video.frames[i], options.config);
  });

  const auto samples = sample_pixels(std::span<const Frame>(lowres),
                                     options.sample_count, options.seed);
  const Codebook codebook = fit_codebook(samples, options.config.n,
                                         derive_seed(options.seed, 1),
                                         options.kmeans);

  CompressedVideo out;
  ContainerHeader& h = out.header;
  h.orig_width = static_cast<uint16_t>(first.width());
  h.orig_height = static_cast<uint16_t>(first.height());
  h.s = static_cast<uint8_t>(options.config.s);
  h.n = static_cast<uint8_t>(options.config.n);
  h.fps_num = static_cast<uint16_t>(video.fps.num);
  h.fps_den = static_cast<uint16_t>(video.fps.den);
  h.frame_count = static_cast<uint32_t>(video.frames.size());
  h.codebook = codebook;
  out.frames.resize(lowres.size());
  parallel_for(lowres.size(), options.threads, [&](size_t i) {
    const QuantizedFrame q = quantize_frame(lowres[i], codebook);
    out.frames[i] = pack_indices(q.indices, codebook.n);
  });
  return out;
}

EncodeStats encode_stats(const CompressedVideo& video) {
  const ContainerHeader& h = video.header;
  EncodeStats stats;
  stats.payload_bytes = video.payload_bytes();
  stats.total_bytes = video.total_bytes();
  stats.raw_bytes = static_cast<size_t>(h.orig_width) * h.orig_height * 3 *
                    h.frame_count;
  stats.bitrate_kbps = bitrate_kbps(h);
  stats.payload_ratio =
      static_cast<double>(stats.raw_bytes) / static_cast<double>(stats.payload_bytes);
  stats.file_ratio =
      static_cast<double>(stats.raw_bytes) / static_cast<double>(stats.total_bytes);
  return stats;
}

std::vector<Frame> decode_lowres(const CompressedVideo& video) {
  std::vector<Frame> out;
  out.reserve(video.frames.size());
  for (size_t i = 0; i < video.frames.size(); ++i) {
    out.push_back(dequantize_frame(frame_indices(video, i), video.header.codebook));
  }
  return out;
}

Frame upscale_to_original(const Frame& lowres, const ContainerHeader& header) {
  const Frame up = bilinear_upscale(lowres, header.s);
  const AlignedLayout layout =
      aligned_layout(header.orig_width, header.orig_height, header.s);
  if (up.width() == header.orig_width && up.height() == header.orig_height) {
    return up;
  }
  return crop(up, layout.offset_x, layout.offset_y, header.orig_width,
              header.orig_height);
}

std::vector<Frame> baseline_restore(const CompressedVideo& video, int threads) {
  const auto lowres = decode_lowres(video);
  std::vector<Frame> out(lowres.size(), Frame(1, 1));
  parallel_for(lowres.size(), threads, [&](size_t i) {
    out[i] = upscale_to_original(lowres[i], video.header);
  });
  return out;
}

template <typename Real>
std::vector<TrainingPair<Real>> make_training_pairs(const VideoSequence& original,
                                                    const CompressedVideo& encoded) {
  if (original.frames.size() != encoded.frames.size()) {
    throw Error(ErrorCode::kInputError, "frame counts differ");
  }
  const auto conditions = baseline_restore(encoded);
  std::vector<TrainingPair<Real>> pairs;
  pairs.reserve(conditions.size());
  for (size_t i = 0; i < conditions.size(); ++i) {
    pairs.push_back({to_signed_unit<Real>(original.frames[i]),
                     make_condition<Real>(conditions[i])});
  }
  return pairs;
}

template <typename Real>
TrainResult<Real> train_denoiser(const std::vector<TrainingPair<Real>>& pairs,
                                 const NoiseSchedule& schedule,
                                 const TrainOptions& options) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no training frames");
  }
  if (options.batch < 1 || options.steps < 0 || !(options.lr > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "training needs batch >= 1, steps >= 0 and lr > 0");
  }
  TrainResult<Real> result;
  result.params = init_denoiser<Real>(options.arch, derive_seed(options.seed, 0));
  AdamState<Real> optimizer;
  Rng rng(derive_seed(options.seed, 1));
  result.losses.reserve(options.steps);
  double window = 0.0;
  std::vector<const Planes<Real>*> x0(options.batch);
  std::vector<const Planes<Real>*> cond(options.batch);
  for (int step = 1; step <= options.steps; ++step) {
    for (int b = 0; b < options.batch; ++b) {
      const auto& pair = pairs[rng.uniform_int(pairs.size())];
      x0[b] = &pair.x0;
      cond[b] = &pair.condition;
    }
    const DiffusionBatch<Real> batch = sample_batch(x0, cond, schedule, rng);
    const double loss =
        training_step(result.params, optimizer, batch, schedule, options.lr);
    result.losses.push_back(loss);
    window += loss;
    if (options.log_every > 0 && step % options.log_every == 0) {
      if (options.on_progress) options.on_progress(step, window / options.log_every);
      window = 0.0;
    }
  }
  return result;
}

template <typename Real>
std::vector<Frame> restore_video(const CompressedVideo& video,
                                 const DenoiserParams<Real>& params,
                                 const NoiseSchedule& schedule,
                                 const RestoreOptions& options) {
  const auto conditions = baseline_restore(video, options.threads);
  const NoisePredictor<Real> predictor = make_predictor(params, schedule);
  std::vector<Frame> out(conditions.size(), Frame(1, 1));
  parallel_for(conditions.size(), options.threads, [&](size_t i) {
    const Planes<Real> restored =
        restore_planes(predictor, make_condition<Real>(conditions[i]), schedule,
                       derive_seed(options.seed, i), options.mode);
    out[i] = from_signed_unit(restored);
  });
  return out;
}

void check_condition_match(const Checkpoint& ckpt, const ContainerHeader& header) {
  if (ckpt.s != header.s || ckpt.n != header.n) {
    throw Error(ErrorCode::kConditionMismatch,
                "checkpoint trained for s=" + std::to_string(ckpt.s) +
                    ", n=" + std::to_string(ckpt.n) + " but container has s=" +
                    std::to_string(header.s) + ", n=" + std::to_string(header.n));
  }
}

void SweepConfig::validate() const {
  if (s_values.empty() || n_values.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "sweep grid must not be empty");
  }
  for (int s : s_values) {
    for (int n : n_values) {
      EncoderConfig{.s = s, .n = n, .blur_sigma = std::nullopt}.validate();
    }
  }
  (void)schedule();
}

NoiseSchedule SweepConfig::schedule() const {
  if (!beta_start && !beta_end) return make_scaled_schedule(schedule_steps);
  return make_schedule(schedule_steps, beta_start.value_or(kDefaultBetaStart),
                       beta_end.value_or(kDefaultBetaEnd));
}

namespace {

template <typename Real>
SweepRow run_cell(const SweepConfig& config, int s, int n, size_t cell_index,
                  const std::vector<VideoSequence>& train,
                  const std::vector<VideoSequence>& eval) {
  const uint64_t cell_seed = derive_seed(config.seed, cell_index);
  EncodeOptions enc;
  enc.config = EncoderConfig{.s = s, .n = n, .blur_sigma = std::nullopt};
  enc.sample_count = config.sample_count;
  const int inner_threads = config.parallel_cells ? 1 : config.threads;
  enc.threads = inner_threads;

  std::vector<TrainingPair<Real>> pairs;
  for (size_t i = 0; i < train.size(); ++i) {
    enc.seed = derive_seed(cell_seed, 100 + i);
    const auto encoded = encode_video(train[i], enc);
    auto p = make_training_pairs<Real>(train[i], encoded);
    std::move(p.begin(), p.end(), std::back_inserter(pairs));
  }

  SweepRow row;
  row.s = s;
  row.n = n;
  const NoiseSchedule schedule = config.schedule();
  TrainOptions train_opts = config.train;
  train_opts.seed = derive_seed(cell_seed, 1);
  std::optional<DenoiserParams<Real>> params;
  const auto start = std::chrono::steady_clock::now();
  try {
    params = train_denoiser(pairs, schedule, train_opts).params;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNumericalDivergence) throw;
    std::fprintf(stderr, "cell s=%d n=%d: %s\n", s, n, e.what());
  }
  row.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  QualityReport baseline;
  QualityReport restored;
  for (size_t i = 0; i < eval.size(); ++i) {
    enc.seed = derive_seed(cell_seed, 10000 + i);
    const auto encoded = encode_video(eval[i], enc);
    row.bitrate_kbps = bitrate_kbps(encoded.header);
    row.file_bytes += encoded.total_bytes();
    const auto base = baseline_restore(encoded, inner_threads);
    for (size_t f = 0; f < base.size(); ++f) {
      const double m = mse(eval[i].frames[f], base[f]);
      baseline.add({m, psnr_from_mse(m), ssim(eval[i].frames[f], base[f])});
    }
    if (params) {
      RestoreOptions ropts = config.restore;
      ropts.seed = derive_seed(cell_seed, 20000 + i);
      ropts.threads = inner_threads;
      const auto out = restore_video(encoded, *params, schedule, ropts);
      for (size_t f = 0; f < out.size(); ++f) {
        const double m = mse(eval[i].frames[f], out[f]);
        restored.add({m, psnr_from_mse(m), ssim(eval[i].frames[f], out[f])});
      }
    }
  }
  baseline.finalize();
  row.psnr_baseline = baseline.mean_psnr_db;
  row.ssim_baseline = baseline.mean_ssim;
  if (params) {
    restored.finalize();
    row.psnr_restored = restored.mean_psnr_db;
    row.ssim_restored = restored.mean_ssim;
  }
  return row;
}

}  // namespace

template <typename Real>
std::vector<SweepRow> run_sweep(const SweepConfig& config,
                                const std::vector<VideoSequence>& train,
                                const std::vector<VideoSequence>& eval) {
  config.validate();
  if (train.empty() || eval.empty()) {
    throw Error(ErrorCode::kEmptyInput, "sweep needs training and evaluation videos");
  }
  std::vector<std::pair<int, int>> cells;
  for (int s : config.s_values) {
    for (int n : config.n_values) cells.emplace_back(s, n);
  }
  std::vector<SweepRow> rows(cells.size());
  parallel_for(cells.size(), config.parallel_cells ? config.threads : 1,
               [&](size_t i) {
                 rows[i] = run_cell<Real>(config, cells[i].first,
                                          cells[i].second, i, train, eval);
               });
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  char buf[256];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.3f,%zu,%.6f,%.8f,", r.s, r.n,
                  r.bitrate_kbps, r.file_bytes, r.psnr_baseline, r.ssim_baseline);
    out += buf;
    if (r.psnr_restored && r.ssim_restored) {
      std::snprintf(buf, sizeof(buf), "%.6f,%.8f,", *r.psnr_restored,
                    *r.ssim_restored);
    } else {
      std::snprintf(buf, sizeof(buf), "diverged,diverged,");
    }
    out += buf;
    std::snprintf(buf, sizeof(buf), "%.3f\n", r.train_seconds);
    out += buf;
  }
  return out;
}

UplinkVerdict uplink_check(const ContainerHeader& header, double capacity_kbps) {
  if (!(capacity_kbps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "uplink capacity must be positive");
  }
  UplinkVerdict verdict;
  verdict.capacity_kbps = capacity_kbps;
  verdict.bitrate_kbps = bitrate_kbps(header);
  verdict.feasible = verdict.bitrate_kbps <= capacity_kbps;
  for (int s : kUplinkScaleGrid) {
    for (int n : kUplinkDepthGrid) {
      ContainerHeader probe;
      probe.orig_width = header.orig_width;
      probe.orig_height = header.orig_height;
      probe.fps_num = header.fps_num;
      probe.fps_den = header.fps_den;
      probe.s = static_cast<uint8_t>(s);
      probe.n = static_cast<uint8_t>(n);
      const double kbps = bitrate_kbps(probe);
      if (kbps <= capacity_kbps) verdict.feasible_grid.push_back({s, n, kbps});
    }
  }
  return verdict;
}

std::string describe_header(const ContainerHeader& h) {
  std::ostringstream os;
  os << "magic=CADM\n"
     << "version=" << int(h.version) << "\n"
     << "orig_width=" << h.orig_width << "\n"
     << "orig_height=" << h.orig_height << "\n"
     << "s=" << int(h.s) << "\n"
     << "n=" << int(h.n) << "\n"
     << "fps_num=" << h.fps_num << "\n"
     << "fps_den=" << h.fps_den << "\n"
     << "frame_count=" << h.frame_count << "\n"
     << "decoded_width=" << h.decoded_width() << "\n"
     << "decoded_height=" << h.decoded_height() << "\n"
     << "codebook_entries=" << h.codebook.size() << "\n"
     << "plane_bytes=" << h.plane_bytes() << "\n"
     << "header_bytes=" << h.header_bytes() << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", bitrate_kbps(h));
  os << "bitrate_kbps=" << buf << "\n"
     << "overhead_bits=" << container_overhead_bits(h.n) << "\n";
  return os.str();
}

#define CADM_INSTANTIATE(Real)                                                 \
  template std::vector<TrainingPair<Real>> make_training_pairs<Real>(          \
      const VideoSequence&, const CompressedVideo&);                           \
  template TrainResult<Real> train_denoiser<Real>(                             \
      const std::vector<TrainingPair<Real>>&, const NoiseSchedule&,            \
      const TrainOptions&);                                                    \
  template std::vector<Frame> restore_video<Real>(                             \
      const CompressedVideo&, const DenoiserParams<Real>&,                     \
      const NoiseSchedule&, const RestoreOptions&);                            \
  template std::vector<SweepRow> run_sweep<Real>(                              \
      const SweepConfig&, const std::vector<VideoSequence>&,                   \
      const std::vector<VideoSequence>&);

CADM_INSTANTIATE(float)
CADM_INSTANTIATE(double)
#undef CADM_INSTANTIATE

}  // namespace cadm
