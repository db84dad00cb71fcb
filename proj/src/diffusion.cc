#include "cadm/diffusion.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "cadm/error.h"

namespace cadm {

NoiseSchedule make_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1 || !(beta_start > 0.0) || !(beta_start <= beta_end) ||
      !(beta_end < 1.0)) {
    throw Error(ErrorCode::kInvalidSchedule,
                "need T >= 1 and 0 < beta_start <= beta_end < 1 (T=" +
                    std::to_string(steps) +
                    ", beta_start=" + std::to_string(beta_start) +
                    ", beta_end=" + std::to_string(beta_end) + ")");
  }
  NoiseSchedule s;
  s.steps = steps;
  s.beta_start = beta_start;
  s.beta_end = beta_end;
  s.alphas.assign(steps + 1, 1.0);
  s.alpha_bars.assign(steps + 1, 1.0);
  for (int t = 1; t <= steps; ++t) {
    const double frac =
        steps == 1 ? 0.0 : static_cast<double>(t - 1) / (steps - 1);
    const double beta = beta_start + (beta_end - beta_start) * frac;
    s.alphas[t] = 1.0 - beta;
    s.alpha_bars[t] = s.alpha_bars[t - 1] * s.alphas[t];
  }
  return s;
}

NoiseSchedule make_scaled_schedule(int steps) {
  if (steps < 1) {
    throw Error(ErrorCode::kInvalidSchedule, "T must be >= 1");
  }
  const double scale = static_cast<double>(kObjectiveSteps) / steps;
  return make_schedule(steps, kDefaultBetaStart * scale,
                       std::min(kDefaultBetaEnd * scale, 0.999));
}

template <typename Real>
Planes<Real> forward_diffuse(const Planes<Real>& x0, int t,
                             const Planes<Real>& eps,
                             const NoiseSchedule& schedule) {
  if (!x0.same_shape(eps)) {
    throw Error(ErrorCode::kShapeError, "x0 and eps shapes differ");
  }
  if (t < 1 || t > schedule.steps) {
    throw Error(ErrorCode::kInvalidArgument,
                "step " + std::to_string(t) + " outside [1, " +
                    std::to_string(schedule.steps) + "]");
  }
  const Real signal = static_cast<Real>(std::sqrt(schedule.alpha_bar(t)));
  const Real noise = static_cast<Real>(std::sqrt(1.0 - schedule.alpha_bar(t)));
  Planes<Real> out(x0.channels, x0.width, x0.height);
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = signal * x0.data[i] + noise * eps.data[i];
  }
  return out;
}

std::string_view sigma_mode_name(SigmaMode mode) {
  switch (mode) {
    case SigmaMode::kInflated: return "inflated";
    case SigmaMode::kStandard: return "standard";
    case SigmaMode::kZero: return "zero";
  }
  return "unknown";
}

SigmaMode parse_sigma_mode(std::string_view name) {
  if (name == "inflated") return SigmaMode::kInflated;
  if (name == "standard") return SigmaMode::kStandard;
  if (name == "zero") return SigmaMode::kZero;
  throw Error(ErrorCode::kInvalidArgument,
              "sigma mode must be inflated, standard or zero, got " +
                  std::string(name));
}

double reverse_sigma_squared(const NoiseSchedule& schedule, int t,
                             SigmaMode mode) {
  if (mode == SigmaMode::kZero) return 0.0;
  const double ab_prev = schedule.alpha_bar(t - 1);
  const double ab = schedule.alpha_bar(t);
  const double posterior = (1.0 - ab_prev) / (1.0 - ab) * (1.0 - schedule.alpha(t));
  if (mode == SigmaMode::kStandard) return posterior;
  return posterior / schedule.alpha(t - 1);
}

template <typename Real>
Planes<Real> gaussian_planes(int channels, int width, int height, Rng& rng) {
  Planes<Real> out(channels, width, height);
  for (Real& v : out.data) v = static_cast<Real>(rng.normal());
  return out;
}

template <typename Real>
Planes<Real> reverse_diffuse(const NoisePredictor<Real>& predictor,
                             const Planes<Real>& condition,
                             const NoiseSchedule& schedule, Planes<Real> x,
                             SigmaMode mode, Rng& rng) {
  if (x.width != condition.width || x.height != condition.height) {
    throw Error(ErrorCode::kShapeError, "x_T and condition sizes differ");
  }
  for (int t = schedule.steps; t >= 1; --t) {
    const double sigma2 = reverse_sigma_squared(schedule, t, mode);
    const double ab_prev = schedule.alpha_bar(t - 1);
    const double ab = schedule.alpha_bar(t);
    const double radicand = 1.0 - ab_prev - sigma2;
    if (radicand < 0.0) {
      throw Error(ErrorCode::kSchedulerError,
                  "sigma_t^2 exceeds 1 - alpha_bar_{t-1} at t=" +
                      std::to_string(t) + " (" + std::to_string(sigma2) +
                      " > " + std::to_string(1.0 - ab_prev) + ")");
    }
    const Planes<Real> eps = predictor(x, t, condition);
    if (!eps.same_shape(x)) {
      throw Error(ErrorCode::kShapeError, "predictor output shape mismatch");
    }
    const Real x0_scale = static_cast<Real>(std::sqrt(ab_prev) / std::sqrt(ab));
    const Real eps_in_x0 = static_cast<Real>(std::sqrt(1.0 - ab));
    const Real dir = static_cast<Real>(std::sqrt(radicand));
    const Real sigma = static_cast<Real>(std::sqrt(sigma2));
    for (size_t i = 0; i < x.data.size(); ++i) {
      const Real delta_x0 = x0_scale * (x.data[i] - eps_in_x0 * eps.data[i]);
      x.data[i] = delta_x0 + dir * eps.data[i];
    }
    if (sigma2 > 0.0) {
      for (Real& v : x.data) v += sigma * static_cast<Real>(rng.normal());
    }
  }
  return x;
}

template <typename Real>
Planes<Real> restore_planes(const NoisePredictor<Real>& predictor,
                            const Planes<Real>& condition,
                            const NoiseSchedule& schedule, uint64_t seed,
                            SigmaMode mode) {
  Rng rng(seed);
  Planes<Real> x_T =
      gaussian_planes<Real>(3, condition.width, condition.height, rng);
  return reverse_diffuse(predictor, condition, schedule, std::move(x_T), mode,
                         rng);
}

#define CADM_INSTANTIATE(Real)                                               \
  template Planes<Real> forward_diffuse<Real>(                               \
      const Planes<Real>&, int, const Planes<Real>&, const NoiseSchedule&);  \
  template Planes<Real> gaussian_planes<Real>(int, int, int, Rng&);          \
  template Planes<Real> reverse_diffuse<Real>(                               \
      const NoisePredictor<Real>&, const Planes<Real>&, const NoiseSchedule&, \
      Planes<Real>, SigmaMode, Rng&);                                        \
  template Planes<Real> restore_planes<Real>(                                \
      const NoisePredictor<Real>&, const Planes<Real>&, const NoiseSchedule&, \
      uint64_t, SigmaMode);

CADM_INSTANTIATE(float)
CADM_INSTANTIATE(double)
#undef CADM_INSTANTIATE

}  // namespace cadm
