#include "cadm/denoiser.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "cadm/error.h"
#include "cadm/rng.h"

namespace cadm {

void Architecture::validate() const {
  if (hidden < 1 || embed_dim < 2 || embed_dim % 2 != 0 ||
      !(prior_variance >= 0.0) || !std::isfinite(prior_variance)) {
    throw Error(ErrorCode::kInvalidArgument,
                "architecture needs hidden >= 1, an even embed_dim >= 2 and "
                "prior_variance >= 0 (hidden=" + std::to_string(hidden) +
                    ", embed_dim=" + std::to_string(embed_dim) +
                    ", prior_variance=" + std::to_string(prior_variance) + ")");
  }
}

ParamLayout::ParamLayout(const Architecture& arch) {
  arch.validate();
  constexpr int kTaps = Architecture::kKernel * Architecture::kKernel;
  const int widths[Architecture::kLayers + 1] = {
      Architecture::kInputChannels, arch.hidden, arch.hidden, arch.hidden,
      Architecture::kOutputChannels};
  size_t offset = 0;
  for (int l = 0; l < Architecture::kLayers; ++l) {
    in_channels[l] = widths[l];
    out_channels[l] = widths[l + 1];
    conv_weight[l] = offset;
    offset += static_cast<size_t>(widths[l + 1]) * widths[l] * kTaps;
    conv_bias[l] = offset;
    offset += widths[l + 1];
    if (l == 0) {
      embed_weight = offset;
      offset += static_cast<size_t>(arch.hidden) * arch.embed_dim;
      embed_bias = offset;
      offset += arch.hidden;
    }
  }
  skip_gain = offset;
  total = offset + 1;
}

template <typename Real>
bool DenoiserParams<Real>::all_finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](Real v) { return std::isfinite(v); });
}

template <typename Real>
DenoiserParams<Real> init_denoiser(const Architecture& arch, uint64_t seed) {
  const ParamLayout layout(arch);
  DenoiserParams<Real> params(arch);
  Rng rng(seed);
  auto fill = [&](size_t offset, size_t count, double fan_in) {
    const double stddev = std::sqrt(2.0 / fan_in);
    for (size_t i = 0; i < count; ++i) {
      params.values[offset + i] = static_cast<Real>(stddev * rng.normal());
    }
  };
  for (int l = 0; l + 1 < Architecture::kLayers; ++l) {
    const size_t fan_in = static_cast<size_t>(layout.in_channels[l]) * 9;
    fill(layout.conv_weight[l], layout.out_channels[l] * fan_in,
         static_cast<double>(fan_in));
  }
  fill(layout.embed_weight, static_cast<size_t>(arch.hidden) * arch.embed_dim,
       arch.embed_dim);
  params.values[layout.skip_gain] = Real(1);
  return params;
}

std::vector<double> timestep_embedding(int t, int dim) {
  const int half = dim / 2;
  std::vector<double> out(dim);
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / half);
    out[i] = std::sin(t * freq);
    out[i + half] = std::cos(t * freq);
  }
  return out;
}

namespace {

template <typename Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using MatMap = Eigen::Map<Mat<Real>>;
template <typename Real>
using ConstMatMap = Eigen::Map<const Mat<Real>>;
template <typename Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// 3x3 zero-padded patches: row (c*9 + ky*3 + kx), column (y*w + x).
template <typename Real>
void im2col(const Mat<Real>& in, int w, int h, Mat<Real>& col) {
  const int channels = static_cast<int>(in.rows());
  col.resize(static_cast<Eigen::Index>(channels) * 9, in.cols());
  for (int c = 0; c < channels; ++c) {
    const Real* src = in.data() + static_cast<size_t>(c) * in.cols();
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        Real* dst = col.data() + static_cast<size_t>(c * 9 + ky * 3 + kx) * col.cols();
        const int dy = ky - 1;
        const int dx = kx - 1;
        const int x_lo = std::max(0, -dx);
        const int x_hi = std::min(w, w - dx);
        for (int y = 0; y < h; ++y) {
          Real* row = dst + static_cast<size_t>(y) * w;
          const int sy = y + dy;
          if (sy < 0 || sy >= h) {
            std::fill(row, row + w, Real(0));
            continue;
          }
          const Real* srow = src + static_cast<size_t>(sy) * w;
          std::fill(row, row + x_lo, Real(0));
          std::copy(srow + x_lo + dx, srow + x_hi + dx, row + x_lo);
          std::fill(row + x_hi, row + w, Real(0));
        }
      }
    }
  }
}

// Adjoint of im2col.
template <typename Real>
void col2im(const Mat<Real>& col, int channels, int w, int h, Mat<Real>& out) {
  out.setZero(channels, col.cols());
  for (int c = 0; c < channels; ++c) {
    Real* dst = out.data() + static_cast<size_t>(c) * out.cols();
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const Real* src =
            col.data() + static_cast<size_t>(c * 9 + ky * 3 + kx) * col.cols();
        const int dy = ky - 1;
        const int dx = kx - 1;
        const int x_lo = std::max(0, -dx);
        const int x_hi = std::min(w, w - dx);
        for (int y = 0; y < h; ++y) {
          const int sy = y + dy;
          if (sy < 0 || sy >= h) continue;
          const Real* row = src + static_cast<size_t>(y) * w;
          Real* drow = dst + static_cast<size_t>(sy) * w;
          for (int x = x_lo; x < x_hi; ++x) drow[x + dx] += row[x];
        }
      }
    }
  }
}

template <typename Real>
void silu(const Mat<Real>& z, Mat<Real>& h) {
  h = (z.array() / (Real(1) + (-z.array()).exp())).matrix();
}

// dz = dh * silu'(z), silu'(z) = s (1 + z (1 - s)), s = sigmoid(z).
template <typename Real>
void silu_backward(const Mat<Real>& z, const Mat<Real>& dh, Mat<Real>& dz) {
  const auto s = (Real(1) / (Real(1) + (-z.array()).exp()));
  dz = (dh.array() * s * (Real(1) + z.array() * (Real(1) - s))).matrix();
}

// Forward activations kept for the backward pass.
template <typename Real>
struct Workspace {
  int width = 0;
  int height = 0;
  Mat<Real> input;  // 6 x HW
  Mat<Real> col[Architecture::kLayers];
  Mat<Real> z[Architecture::kLayers - 1];
  Mat<Real> h[Architecture::kLayers - 1];
  Mat<Real> out;   // 3 x HW
  Mat<Real> skip;  // k_t (x_t - sqrt(ab_t) c), 3 x HW
  Vec<Real> embed;
  // Backward scratch.
  Mat<Real> dz, dh, dcol;
};

template <typename Real>
void check_inputs(const Planes<Real>& x_t, const Planes<Real>& c, int t,
                  const NoiseSchedule& schedule) {
  if (x_t.channels != 3 || c.channels != 3 || x_t.width != c.width ||
      x_t.height != c.height) {
    throw Error(ErrorCode::kShapeError,
                "x_t and condition must be 3-channel planes of equal size");
  }
  if (t < 1 || t > schedule.steps) {
    throw Error(ErrorCode::kInvalidArgument,
                "step " + std::to_string(t) + " outside [1, " +
                    std::to_string(schedule.steps) + "]");
  }
}

template <typename Real>
void forward(const DenoiserParams<Real>& params, const ParamLayout& layout,
             const NoiseSchedule& schedule, const Planes<Real>& x_t, int t,
             const Planes<Real>& c, Workspace<Real>& ws) {
  const int w = x_t.width;
  const int h = x_t.height;
  const Eigen::Index hw = static_cast<Eigen::Index>(x_t.plane_size());
  ws.width = w;
  ws.height = h;
  ws.input.resize(6, hw);
  std::copy(x_t.data.begin(), x_t.data.end(), ws.input.data());
  std::copy(c.data.begin(), c.data.end(), ws.input.data() + 3 * hw);

  const Real* p = params.values.data();
  const int hidden = params.arch.hidden;
  const int embed_dim = params.arch.embed_dim;
  const auto emb = timestep_embedding(t, embed_dim);
  ws.embed.resize(embed_dim);
  for (int i = 0; i < embed_dim; ++i) ws.embed[i] = static_cast<Real>(emb[i]);
  const Vec<Real> time_bias =
      ConstMatMap<Real>(p + layout.embed_weight, hidden, embed_dim) * ws.embed +
      Eigen::Map<const Vec<Real>>(p + layout.embed_bias, hidden);

  const Mat<Real>* layer_in = &ws.input;
  for (int l = 0; l < Architecture::kLayers; ++l) {
    const int cin = layout.in_channels[l];
    const int cout = layout.out_channels[l];
    im2col(*layer_in, w, h, ws.col[l]);
    const ConstMatMap<Real> weight(p + layout.conv_weight[l], cout, cin * 9);
    const Eigen::Map<const Vec<Real>> bias(p + layout.conv_bias[l], cout);
    Mat<Real>& z = (l + 1 < Architecture::kLayers) ? ws.z[l] : ws.out;
    z.noalias() = weight * ws.col[l];
    if (l == 0) {
      z.colwise() += bias + time_bias;
    } else {
      z.colwise() += bias;
    }
    if (l + 1 < Architecture::kLayers) {
      silu(ws.z[l], ws.h[l]);
      layer_in = &ws.h[l];
    }
  }
  const double ab = schedule.alpha_bar(t);
  const Real k = static_cast<Real>(
      std::sqrt(1.0 - ab) / (ab * params.arch.prior_variance + 1.0 - ab));
  const Real signal = static_cast<Real>(std::sqrt(ab));
  ws.skip = k * (ws.input.topRows(3) - signal * ws.input.bottomRows(3));
  ws.out += p[layout.skip_gain] * ws.skip;
}

// Accumulates d(loss)/d(params) into |grad| given d(loss)/d(out).
template <typename Real>
void backward(const DenoiserParams<Real>& params, const ParamLayout& layout,
              Workspace<Real>& ws, const Mat<Real>& dout, Real* grad) {
  const Real* p = params.values.data();
  const int w = ws.width;
  const int h = ws.height;
  const int hidden = params.arch.hidden;

  grad[layout.skip_gain] += dout.cwiseProduct(ws.skip).sum();

  const Mat<Real>* upstream = &dout;
  for (int l = Architecture::kLayers - 1; l >= 0; --l) {
    const int cin = layout.in_channels[l];
    const int cout = layout.out_channels[l];
    const Mat<Real>& dz = *upstream;
    MatMap<Real>(grad + layout.conv_weight[l], cout, cin * 9).noalias() +=
        dz * ws.col[l].transpose();
    const Vec<Real> dbias = dz.rowwise().sum();
    Eigen::Map<Vec<Real>>(grad + layout.conv_bias[l], cout) += dbias;
    if (l == 0) {
      MatMap<Real>(grad + layout.embed_weight, hidden, params.arch.embed_dim)
          .noalias() += dbias * ws.embed.transpose();
      Eigen::Map<Vec<Real>>(grad + layout.embed_bias, hidden) += dbias;
      break;
    }
    const ConstMatMap<Real> weight(p + layout.conv_weight[l], cout, cin * 9);
    ws.dcol.noalias() = weight.transpose() * dz;
    col2im(ws.dcol, cin, w, h, ws.dh);
    Mat<Real> next;
    silu_backward(ws.z[l - 1], ws.dh, next);
    ws.dz = std::move(next);
    upstream = &ws.dz;
  }
}

// Mean of per-item losses summed in sorted order, so the result does not
// depend on the order of items in the batch.
double batch_mean(std::vector<double> item_loss) {
  std::sort(item_loss.begin(), item_loss.end());
  double sum = 0.0;
  for (double v : item_loss) sum += v;
  return sum / static_cast<double>(item_loss.size());
}

template <typename Real>
Planes<Real> output_planes(const Workspace<Real>& ws) {
  Planes<Real> out(3, ws.width, ws.height);
  std::copy(ws.out.data(), ws.out.data() + ws.out.size(), out.data.begin());
  return out;
}

}  // namespace

template <typename Real>
Planes<Real> predict_noise(const DenoiserParams<Real>& params,
                           const NoiseSchedule& schedule,
                           const Planes<Real>& x_t, int t,
                           const Planes<Real>& condition) {
  check_inputs(x_t, condition, t, schedule);
  const ParamLayout layout(params.arch);
  if (params.values.size() != layout.total) {
    throw Error(ErrorCode::kShapeError, "parameter count does not match architecture");
  }
  Workspace<Real> ws;
  forward(params, layout, schedule, x_t, t, condition, ws);
  return output_planes(ws);
}

template <typename Real>
NoisePredictor<Real> make_predictor(const DenoiserParams<Real>& params,
                                    const NoiseSchedule& schedule) {
  return [&params, &schedule](const Planes<Real>& x_t, int t,
                              const Planes<Real>& c) {
    return predict_noise(params, schedule, x_t, t, c);
  };
}

template <typename Real>
void DiffusionBatch<Real>::validate(const NoiseSchedule& schedule) const {
  if (x0.empty() || condition.size() != x0.size() || t.size() != x0.size() ||
      eps.size() != x0.size()) {
    throw Error(ErrorCode::kShapeError, "batch members have different lengths");
  }
  for (size_t i = 0; i < x0.size(); ++i) {
    if (!x0[i].same_shape(eps[i]) || !x0[i].same_shape(condition[i]) ||
        x0[i].channels != 3) {
      throw Error(ErrorCode::kShapeError,
                  "batch item " + std::to_string(i) + " has mismatched shapes");
    }
    if (t[i] < 1 || t[i] > schedule.steps) {
      throw Error(ErrorCode::kInvalidArgument,
                  "batch item " + std::to_string(i) + " has t outside [1, T]");
    }
  }
}

template <typename Real>
DiffusionBatch<Real> sample_batch(const std::vector<const Planes<Real>*>& x0,
                                  const std::vector<const Planes<Real>*>& cond,
                                  const NoiseSchedule& schedule, Rng& rng) {
  DiffusionBatch<Real> batch;
  for (size_t i = 0; i < x0.size(); ++i) {
    batch.x0.push_back(*x0[i]);
    batch.condition.push_back(*cond[i]);
    batch.t.push_back(1 + static_cast<int>(rng.uniform_int(schedule.steps)));
    batch.eps.push_back(
        gaussian_planes<Real>(x0[i]->channels, x0[i]->width, x0[i]->height, rng));
  }
  return batch;
}

template <typename Real>
double diffusion_loss(const DenoiserParams<Real>& params,
                      const DiffusionBatch<Real>& batch,
                      const NoiseSchedule& schedule,
                      std::vector<Real>* gradient) {
  batch.validate(schedule);
  const ParamLayout layout(params.arch);
  if (params.values.size() != layout.total) {
    throw Error(ErrorCode::kShapeError, "parameter count does not match architecture");
  }
  if (gradient) gradient->assign(layout.total, Real(0));
  Workspace<Real> ws;
  Mat<Real> dout;
  const Real inv_batch = Real(1) / static_cast<Real>(batch.size());
  std::vector<double> item_loss(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    const Planes<Real> x_t =
        forward_diffuse(batch.x0[i], batch.t[i], batch.eps[i], schedule);
    forward(params, layout, schedule, x_t, batch.t[i], batch.condition[i], ws);
    const ConstMatMap<Real> eps(batch.eps[i].data.data(), 3,
                                static_cast<Eigen::Index>(x_t.plane_size()));
    const Mat<Real> residual = ws.out - eps;
    item_loss[i] = static_cast<double>(residual.squaredNorm());
    if (gradient) {
      dout = (Real(2) * inv_batch) * residual;
      backward(params, layout, ws, dout, gradient->data());
    }
  }
  return batch_mean(item_loss);
}

template <typename Real>
double diffusion_loss(const NoisePredictor<Real>& predictor,
                      const DiffusionBatch<Real>& batch,
                      const NoiseSchedule& schedule) {
  batch.validate(schedule);
  std::vector<double> item_loss(batch.size(), 0.0);
  for (size_t i = 0; i < batch.size(); ++i) {
    const Planes<Real> x_t =
        forward_diffuse(batch.x0[i], batch.t[i], batch.eps[i], schedule);
    const Planes<Real> pred = predictor(x_t, batch.t[i], batch.condition[i]);
    for (size_t k = 0; k < pred.data.size(); ++k) {
      const double d = static_cast<double>(batch.eps[i].data[k]) - pred.data[k];
      item_loss[i] += d * d;
    }
  }
  return batch_mean(item_loss);
}

template <typename Real>
double training_step(DenoiserParams<Real>& params, AdamState<Real>& opt,
                     const DiffusionBatch<Real>& batch,
                     const NoiseSchedule& schedule, double lr) {
  std::vector<Real> grad;
  const double loss = diffusion_loss(params, batch, schedule, &grad);
  const bool grad_finite = std::all_of(grad.begin(), grad.end(),
                                       [](Real g) { return std::isfinite(g); });
  if (!std::isfinite(loss) || !grad_finite) {
    throw Error(ErrorCode::kNumericalDivergence,
                "non-finite loss at optimizer step " + std::to_string(opt.step + 1));
  }
  if (opt.m.size() != params.size()) {
    opt.m.assign(params.size(), Real(0));
    opt.v.assign(params.size(), Real(0));
    opt.step = 0;
  }
  ++opt.step;
  const double bias1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double bias2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  const Real b1 = static_cast<Real>(opt.beta1);
  const Real b2 = static_cast<Real>(opt.beta2);
  const Real step_size = static_cast<Real>(lr / bias1);
  const Real inv_sqrt_bias2 = static_cast<Real>(1.0 / std::sqrt(bias2));
  const Real eps = static_cast<Real>(opt.epsilon);
  for (size_t i = 0; i < params.size(); ++i) {
    const Real g = grad[i];
    opt.m[i] = b1 * opt.m[i] + (Real(1) - b1) * g;
    opt.v[i] = b2 * opt.v[i] + (Real(1) - b2) * g * g;
    params.values[i] -=
        step_size * opt.m[i] / (std::sqrt(opt.v[i]) * inv_sqrt_bias2 + eps);
  }
  return loss;
}

#define CADM_INSTANTIATE(Real)                                                \
  template struct DenoiserParams<Real>;                                       \
  template struct DiffusionBatch<Real>;                                       \
  template DenoiserParams<Real> init_denoiser<Real>(const Architecture&,      \
                                                    uint64_t);                \
  template Planes<Real> predict_noise<Real>(                                  \
      const DenoiserParams<Real>&, const NoiseSchedule&, const Planes<Real>&, \
      int, const Planes<Real>&);                                              \
  template NoisePredictor<Real> make_predictor<Real>(                         \
      const DenoiserParams<Real>&, const NoiseSchedule&);                     \
  template DiffusionBatch<Real> sample_batch<Real>(                           \
      const std::vector<const Planes<Real>*>&,                                \
      const std::vector<const Planes<Real>*>&, const NoiseSchedule&, Rng&);   \
  template double diffusion_loss<Real>(const DenoiserParams<Real>&,           \
                                       const DiffusionBatch<Real>&,           \
                                       const NoiseSchedule&,                  \
                                       std::vector<Real>*);                   \
  template double diffusion_loss<Real>(const NoisePredictor<Real>&,           \
                                       const DiffusionBatch<Real>&,           \
                                       const NoiseSchedule&);                 \
  template double training_step<Real>(DenoiserParams<Real>&,                  \
                                      AdamState<Real>&,                       \
                                      const DiffusionBatch<Real>&,            \
                                      const NoiseSchedule&, double);

CADM_INSTANTIATE(float)
CADM_INSTANTIATE(double)
#undef CADM_INSTANTIATE

}  // namespace cadm
