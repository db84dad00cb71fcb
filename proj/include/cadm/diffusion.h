#ifndef CADM_DIFFUSION_H_
#define CADM_DIFFUSION_H_

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "cadm/frame.h"
#include "cadm/rng.h"

namespace cadm {

// Linear-beta noise schedule. Vectors are indexed by step t in [0, T];
// entry 0 is the clean-signal convention alpha_0 = alpha_bar_0 = 1.
struct NoiseSchedule {
  int steps = 0;  // T
  double beta_start = 0.0;
  double beta_end = 0.0;
  std::vector<double> alphas;
  std::vector<double> alpha_bars;

  double alpha(int t) const { return alphas[t]; }
  double alpha_bar(int t) const { return alpha_bars[t]; }
};

inline constexpr int kObjectiveSteps = 1000;
inline constexpr double kDefaultBetaStart = 1e-4;
inline constexpr double kDefaultBetaEnd = 0.02;

// Throws InvalidSchedule unless T >= 1 and 0 < beta_start <= beta_end < 1.
NoiseSchedule make_schedule(int steps, double beta_start, double beta_end);

// The default beta range rescaled by 1000 / T so that a short schedule
// covers the same noise levels as the 1000-step one (alpha_bar_T ~ 0).
NoiseSchedule make_scaled_schedule(int steps);

// sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps.
// Throws ShapeError on mismatched shapes, InvalidArgument for t outside [1, T].
template <typename Real>
Planes<Real> forward_diffuse(const Planes<Real>& x0, int t,
                             const Planes<Real>& eps,
                             const NoiseSchedule& schedule);

// Variance of the injected noise in the reverse step.
enum class SigmaMode {
  kInflated,  // (1 - ab_{t-1}) / (1 - ab_t) * (1 - a_t) / a_{t-1}
  kStandard,  // (1 - ab_{t-1}) / (1 - ab_t) * (1 - a_t)
  kZero,      // deterministic
};

std::string_view sigma_mode_name(SigmaMode mode);
// Throws InvalidArgument for names other than inflated/standard/zero.
SigmaMode parse_sigma_mode(std::string_view name);

double reverse_sigma_squared(const NoiseSchedule& schedule, int t,
                             SigmaMode mode);

// eps_theta(x_t, t, c).
template <typename Real>
using NoisePredictor = std::function<Planes<Real>(
    const Planes<Real>& x_t, int t, const Planes<Real>& condition)>;

// Reverse process from an explicit x_T. Each step forms
//   x_{t-1} = sqrt(ab_{t-1}) x0_hat + sqrt(1 - ab_{t-1} - sigma_t^2) eps
//             + sigma_t z
// with x0_hat = (x_t - sqrt(1 - ab_t) eps) / sqrt(ab_t). z is drawn from
// |rng| only when sigma_t > 0. Returns the unclamped x_0.
// Throws SchedulerError when sigma_t^2 > 1 - ab_{t-1}.
template <typename Real>
Planes<Real> reverse_diffuse(const NoisePredictor<Real>& predictor,
                             const Planes<Real>& condition,
                             const NoiseSchedule& schedule, Planes<Real> x_T,
                             SigmaMode mode, Rng& rng);

// Draws x_T ~ N(0, I) from |seed| and runs the reverse process.
template <typename Real>
Planes<Real> restore_planes(const NoisePredictor<Real>& predictor,
                            const Planes<Real>& condition,
                            const NoiseSchedule& schedule, uint64_t seed,
                            SigmaMode mode);

template <typename Real>
Planes<Real> gaussian_planes(int channels, int width, int height, Rng& rng);

// Conditioning tensor: an upscaled degraded frame mapped to [-1, 1].
template <typename Real>
Planes<Real> make_condition(const Frame& upscaled) {
  return to_signed_unit<Real>(upscaled);
}

}  // namespace cadm

#endif  // CADM_DIFFUSION_H_
