#ifndef CADM_DENOISER_H_
#define CADM_DENOISER_H_

#include <cstdint>
#include <vector>

#include "cadm/diffusion.h"
#include "cadm/frame.h"

namespace cadm {

// Noise-prediction network:
//
//   in  = [x_t | c]                                   (6 channels)
//   h1  = SiLU(conv3x3(in) + Wt * embed(t) + bt)      (hidden)
//   h2  = SiLU(conv3x3(h1))                           (hidden)
//   h3  = SiLU(conv3x3(h2))                           (hidden)
//   out = conv3x3(h3) + g * k_t * (x_t - sqrt(ab_t) c)  (3 channels)
//
// embed(t) is a fixed sinusoidal vector and g a learned skip gain. The skip
// term is the exact noise posterior mean when x_0 ~ N(c, v I):
//   k_t = sqrt(1 - ab_t) / (ab_t v + 1 - ab_t),   v = prior_variance,
// so the convolutional stack only learns the correction to the degraded
// frame. All convolutions use zero "same" padding.
struct Architecture {
  int hidden = 32;
  int embed_dim = 32;  // must be even
  // Variance of x_0 around c assumed by the skip term, in [-1, 1] units.
  double prior_variance = 0.005;

  static constexpr int kInputChannels = 6;
  static constexpr int kOutputChannels = 3;
  static constexpr int kLayers = 4;
  static constexpr int kKernel = 3;

  bool operator==(const Architecture&) const = default;
  // Throws InvalidArgument for non-positive widths, an odd embed_dim or a
  // negative prior_variance.
  void validate() const;
};

// Offsets of each parameter block inside the flat parameter vector.
struct ParamLayout {
  int in_channels[Architecture::kLayers];
  int out_channels[Architecture::kLayers];
  size_t conv_weight[Architecture::kLayers];  // [out][in*9] row-major
  size_t conv_bias[Architecture::kLayers];
  size_t embed_weight;  // [hidden][embed_dim] row-major
  size_t embed_bias;
  size_t skip_gain;
  size_t total;

  explicit ParamLayout(const Architecture& arch);
};

template <typename Real>
struct DenoiserParams {
  Architecture arch;
  std::vector<Real> values;

  DenoiserParams() = default;
  explicit DenoiserParams(const Architecture& a)
      : arch(a), values(ParamLayout(a).total, Real(0)) {}

  size_t size() const { return values.size(); }
  bool all_finite() const;

  template <typename Other>
  DenoiserParams<Other> cast() const {
    DenoiserParams<Other> out;
    out.arch = arch;
    out.values.assign(values.begin(), values.end());
    return out;
  }
};

// He-normal weights for every layer but the last, which starts at zero so
// the untrained network returns the skip term. Zero biases, unit skip gain.
template <typename Real>
DenoiserParams<Real> init_denoiser(const Architecture& arch, uint64_t seed);

std::vector<double> timestep_embedding(int t, int dim);

// Throws ShapeError unless x_t and c are 3-channel planes of equal size,
// InvalidArgument when t is outside [1, T].
template <typename Real>
Planes<Real> predict_noise(const DenoiserParams<Real>& params,
                           const NoiseSchedule& schedule,
                           const Planes<Real>& x_t, int t,
                           const Planes<Real>& condition);

// Both arguments must outlive the returned predictor.
template <typename Real>
NoisePredictor<Real> make_predictor(const DenoiserParams<Real>& params,
                                    const NoiseSchedule& schedule);

template <typename Real>
struct DiffusionBatch {
  std::vector<Planes<Real>> x0;
  std::vector<Planes<Real>> condition;
  std::vector<int> t;  // each in [1, T]
  std::vector<Planes<Real>> eps;

  size_t size() const { return x0.size(); }
  // Throws ShapeError / InvalidArgument on inconsistent members.
  void validate(const NoiseSchedule& schedule) const;
};

// Uniform t in [1, T] and standard normal eps for each clean/condition pair.
template <typename Real>
DiffusionBatch<Real> sample_batch(const std::vector<const Planes<Real>*>& x0,
                                  const std::vector<const Planes<Real>*>& cond,
                                  const NoiseSchedule& schedule, Rng& rng);

// Mean over the batch of ||eps - eps_theta(x_t, t, c)||^2. Fills |gradient|
// (resized to params.size()) when non-null.
template <typename Real>
double diffusion_loss(const DenoiserParams<Real>& params,
                      const DiffusionBatch<Real>& batch,
                      const NoiseSchedule& schedule,
                      std::vector<Real>* gradient = nullptr);

// Same objective with an arbitrary predictor (no gradient).
template <typename Real>
double diffusion_loss(const NoisePredictor<Real>& predictor,
                      const DiffusionBatch<Real>& batch,
                      const NoiseSchedule& schedule);

template <typename Real>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int64_t step = 0;
  std::vector<Real> m;
  std::vector<Real> v;
};

// One Adam step on the diffusion objective. Returns the pre-update loss.
// Throws NumericalDivergence (parameters untouched) on a non-finite loss
// or gradient.
template <typename Real>
double training_step(DenoiserParams<Real>& params, AdamState<Real>& optimizer,
                     const DiffusionBatch<Real>& batch,
                     const NoiseSchedule& schedule, double lr);

}  // namespace cadm

#endif  // CADM_DENOISER_H_
