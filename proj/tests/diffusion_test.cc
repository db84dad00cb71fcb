#include <gtest/gtest.h>

#include <cmath>

#include "cadm/diffusion.h"
#include "cadm/error.h"
#include "test_util.h"

namespace cadm {
namespace {

Planes<double> random_planes(int w, int h, Rng& rng, double scale = 1.0) {
  Planes<double> p(3, w, h);
  for (double& v : p.data) v = scale * (2.0 * rng.uniform() - 1.0);
  return p;
}

TEST(Schedule, SingleStep) {
  const NoiseSchedule s = make_schedule(1, 0.01, 0.02);
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 1.0 - 0.01);
  EXPECT_EQ(s.alpha_bar(0), 1.0);
}

TEST(Schedule, ProductOracle) {
  for (int T : {2, 7, 50, 1000}) {
    const NoiseSchedule s = make_schedule(T, 1e-4, 0.02);
    double prod = 1.0;
    for (int t = 1; t <= T; ++t) {
      const double beta = 1e-4 + (0.02 - 1e-4) * (t - 1) / (T - 1);
      prod *= 1.0 - beta;
      EXPECT_NEAR(s.alpha(t), 1.0 - beta, 1e-15);
    }
    EXPECT_NEAR(s.alpha_bar(T), prod, 1e-15 * T);
  }
}

TEST(Schedule, ObjectiveScheduleReachesNoise) {
  const NoiseSchedule s = make_schedule(1000, 1e-4, 0.02);
  EXPECT_LT(s.alpha_bar(1000), 1e-4);
}

TEST(Schedule, InvariantsProperty) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const int T = 1 + int(rng.uniform_int(200));
    const double b0 = 1e-5 + 0.1 * rng.uniform();
    const double b1 = b0 + (0.9 - b0) * rng.uniform();
    const NoiseSchedule s = make_schedule(T, b0, b1);
    for (int t = 1; t <= T; ++t) {
      EXPECT_GT(s.alpha(t), 0.0);
      EXPECT_LT(s.alpha(t), 1.0);
      EXPECT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
      EXPECT_EQ(s.alpha_bar(t), s.alpha_bar(t - 1) * s.alpha(t));
      const double a = std::sqrt(s.alpha_bar(t));
      const double b = std::sqrt(1.0 - s.alpha_bar(t));
      EXPECT_NEAR(a * a + b * b, 1.0, 1e-12);
    }
  }
}

TEST(Schedule, InvalidRanges) {
  EXPECT_EQ(code_of([] { make_schedule(0, 1e-4, 0.02); }), ErrorCode::kInvalidSchedule);
  EXPECT_EQ(code_of([] { make_schedule(10, 0.0, 0.02); }), ErrorCode::kInvalidSchedule);
  EXPECT_EQ(code_of([] { make_schedule(10, 0.03, 0.02); }), ErrorCode::kInvalidSchedule);
  EXPECT_EQ(code_of([] { make_schedule(10, 0.01, 1.0); }), ErrorCode::kInvalidSchedule);
}

TEST(Forward, ZeroBranches) {
  const NoiseSchedule s = make_schedule(50, 1e-3, 0.15);
  Rng rng(1);
  const auto x0 = random_planes(5, 4, rng);
  const auto eps = random_planes(5, 4, rng);
  const Planes<double> zero(3, 5, 4);
  const auto a = forward_diffuse(x0, 17, zero, s);
  const auto b = forward_diffuse(zero, 17, eps, s);
  for (size_t i = 0; i < a.data.size(); ++i) {
    EXPECT_EQ(a.data[i], std::sqrt(s.alpha_bar(17)) * x0.data[i]);
    EXPECT_EQ(b.data[i], std::sqrt(1.0 - s.alpha_bar(17)) * eps.data[i]);
  }
}

TEST(Forward, Superposition) {
  const NoiseSchedule s = make_schedule(50, 1e-3, 0.15);
  Rng rng(2);
  const auto x0 = random_planes(6, 6, rng);
  const auto eps = random_planes(6, 6, rng);
  const Planes<double> zero(3, 6, 6);
  for (int t : {1, 25, 50}) {
    const auto full = forward_diffuse(x0, t, eps, s);
    const auto a = forward_diffuse(x0, t, zero, s);
    const auto b = forward_diffuse(zero, t, eps, s);
    for (size_t i = 0; i < full.data.size(); ++i) {
      EXPECT_EQ(full.data[i], a.data[i] + b.data[i]);
    }
  }
}

TEST(Forward, MonteCarloMoments) {
  const NoiseSchedule s = make_schedule(1000, 1e-4, 0.02);
  const int t = 300;
  const int draws = 10000;
  Planes<double> x0(1, 1, 1);
  x0.data[0] = 0.6;
  Rng rng(77);
  double sum = 0, sum2 = 0;
  for (int i = 0; i < draws; ++i) {
    Planes<double> eps(1, 1, 1);
    eps.data[0] = rng.normal();
    const double v = forward_diffuse(x0, t, eps, s).data[0];
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws;
  const double var = (sum2 - draws * mean * mean) / (draws - 1);
  const double want_mean = std::sqrt(s.alpha_bar(t)) * 0.6;
  const double want_var = 1.0 - s.alpha_bar(t);
  EXPECT_LT(std::abs(mean - want_mean), 3.0 * std::sqrt(want_var / draws));
  // Standard error of a Gaussian sample variance: sigma^2 sqrt(2 / (N - 1)).
  EXPECT_LT(std::abs(var - want_var), 3.0 * want_var * std::sqrt(2.0 / (draws - 1)));
}

TEST(Forward, Errors) {
  const NoiseSchedule s = make_schedule(10, 1e-3, 0.1);
  const Planes<double> a(3, 4, 4), b(3, 4, 5);
  EXPECT_EQ(code_of([&] { forward_diffuse(a, 1, b, s); }), ErrorCode::kShapeError);
  EXPECT_EQ(code_of([&] { forward_diffuse(a, 0, a, s); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { forward_diffuse(a, 11, a, s); }), ErrorCode::kInvalidArgument);
}

TEST(Sigma, ModesHandEvaluated) {
  const NoiseSchedule s = make_schedule(10, 0.01, 0.2);
  for (int t = 1; t <= 10; ++t) {
    const double ab = s.alpha_bar(t), abp = s.alpha_bar(t - 1);
    const double standard = (1 - abp) / (1 - ab) * (1 - s.alpha(t));
    EXPECT_DOUBLE_EQ(reverse_sigma_squared(s, t, SigmaMode::kStandard), standard);
    EXPECT_DOUBLE_EQ(reverse_sigma_squared(s, t, SigmaMode::kInflated),
                     standard / s.alpha(t - 1));
    EXPECT_EQ(reverse_sigma_squared(s, t, SigmaMode::kZero), 0.0);
  }
  EXPECT_EQ(reverse_sigma_squared(s, 1, SigmaMode::kStandard), 0.0);
}

TEST(Sigma, NameRoundTrip) {
  for (SigmaMode m : {SigmaMode::kInflated, SigmaMode::kStandard, SigmaMode::kZero}) {
    EXPECT_EQ(parse_sigma_mode(sigma_mode_name(m)), m);
  }
  EXPECT_EQ(code_of([] { parse_sigma_mode("ddim"); }), ErrorCode::kInvalidArgument);
}

TEST(Sampler, OracleNoiseRecoversCleanSignal) {
  for (int T : {1, 10, 50, 1000}) {
    const NoiseSchedule s = T == 1000 ? make_schedule(T, 1e-4, 0.02)
                                      : make_schedule(T, 1e-3, 0.15);
    Rng rng(T);
    const auto x0 = random_planes(8, 8, rng);
    const auto cond = random_planes(8, 8, rng);
    Planes<double> eps(3, 8, 8);
    for (double& v : eps.data) v = rng.normal();
    const NoisePredictor<double> oracle = [&](const Planes<double>& x, int t,
                                              const Planes<double>&) {
      Planes<double> e(3, 8, 8);
      const double a = std::sqrt(s.alpha_bar(t));
      const double b = std::sqrt(1.0 - s.alpha_bar(t));
      for (size_t i = 0; i < e.data.size(); ++i) e.data[i] = (x.data[i] - a * x0.data[i]) / b;
      return e;
    };
    Rng unused(0);
    const auto out = reverse_diffuse(oracle, cond, s, forward_diffuse(x0, T, eps, s),
                                     SigmaMode::kZero, unused);
    double worst = 0;
    for (size_t i = 0; i < out.data.size(); ++i) {
      worst = std::max(worst, std::abs(out.data[i] - x0.data[i]));
    }
    EXPECT_LT(worst, 1e-9) << "T=" << T;
  }
}

TEST(Sampler, DeterministicAndShaped) {
  const NoiseSchedule s = make_schedule(20, 1e-3, 0.2);
  Rng rng(5);
  const auto cond = random_planes(7, 5, rng);
  const NoisePredictor<double> pred = [](const Planes<double>& x, int t,
                                         const Planes<double>& c) {
    Planes<double> e = x;
    for (size_t i = 0; i < e.data.size(); ++i) e.data[i] = 0.3 * x.data[i] - 0.01 * t * c.data[i];
    return e;
  };
  for (SigmaMode m : {SigmaMode::kInflated, SigmaMode::kStandard, SigmaMode::kZero}) {
    const auto a = restore_planes(pred, cond, s, 42, m);
    const auto b = restore_planes(pred, cond, s, 42, m);
    EXPECT_EQ(a.data, b.data);
    EXPECT_TRUE(a.same_shape(cond));
  }
  EXPECT_NE(restore_planes(pred, cond, s, 1, SigmaMode::kStandard).data,
            restore_planes(pred, cond, s, 2, SigmaMode::kStandard).data);
}

TEST(Sampler, ZeroModeIsFunctionOfStartingNoise) {
  // Replaying a logged x_T through reverse_diffuse reproduces restore_planes.
  const NoiseSchedule s = make_schedule(20, 1e-3, 0.2);
  Rng rng(6);
  const auto cond = random_planes(6, 6, rng);
  const NoisePredictor<double> pred = [](const Planes<double>& x, int,
                                         const Planes<double>& c) {
    Planes<double> e = x;
    for (size_t i = 0; i < e.data.size(); ++i) e.data[i] = 0.5 * (x.data[i] - c.data[i]);
    return e;
  };
  Rng logged(99);
  const auto x_T = gaussian_planes<double>(3, 6, 6, logged);
  Rng unused(1234);
  EXPECT_EQ(reverse_diffuse(pred, cond, s, x_T, SigmaMode::kZero, unused).data,
            restore_planes(pred, cond, s, 99, SigmaMode::kZero).data);
}

TEST(Sampler, NegativeRadicandNamesStep) {
  // A huge beta makes the inflated-mode variance exceed 1 - alpha_bar_{t-1}.
  const NoiseSchedule s = make_schedule(3, 0.9, 0.95);
  Planes<double> cond(3, 2, 2);
  const NoisePredictor<double> pred = [](const Planes<double>& x, int,
                                         const Planes<double>&) { return x; };
  try {
    restore_planes(pred, cond, s, 1, SigmaMode::kInflated);
    FAIL() << "expected SchedulerError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchedulerError);
    EXPECT_NE(std::string(e.what()).find("t="), std::string::npos);
  }
}

}  // namespace
}  // namespace cadm
