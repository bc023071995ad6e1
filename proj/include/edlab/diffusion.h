// include/edlab/diffusion.h

// Copyright 2026 The edlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef EDLAB_DIFFUSION_H_
#define EDLAB_DIFFUSION_H_

#include <functional>
#include <optional>
#include <string>

#include "edlab/autograd.h"
#include "edlab/types.h"

namespace edlab {

// Linear variance-preserving schedule beta(t) = beta0 + (beta1 - beta0) t on
// [0, 1]. The forward process is dX = -1/2 beta(t) X dt + sqrt(beta(t)) dW.
struct NoiseSchedule {
  double beta0 = 0.05;
  double beta1 = 20.0;
  static constexpr double kTerminalTime = 1.0;

  double Beta(double t) const { return beta0 + (beta1 - beta0) * t; }
  // Throws DomainError unless 0 < beta0 <= beta1.
  void Validate() const;
};

struct DiffusionState {
  Matrix x;
  double t = 0.0;

  void Validate() const;
};

struct SamplerConfig {
  int n_steps = 100;
  bool stochastic = true;

  void Validate() const;
};

// Integral of beta over [0, t], in closed form.
double CumBeta(const NoiseSchedule &schedule, double t);

// X_t | X_0 ~ Normal(mean_coef * X_0, variance * I).
struct MarginalParams {
  double mean_coef = 1.0;
  double variance = 0.0;
};
MarginalParams GetMarginalParams(const NoiseSchedule &schedule, double t);

// `eps` carries variance lambda(t), so the conditional score is -eps / lambda.
struct ForwardDraw {
  Matrix xt;
  Matrix eps;
};
ForwardDraw ForwardSample(const Matrix &x0, double t, const NoiseSchedule &schedule, Rng &rng);
// Same as ForwardSample with the standard-normal draw supplied by the caller.
ForwardDraw ForwardSampleFromNoise(const Matrix &x0, double t, const NoiseSchedule &schedule,
                                   const Matrix &z);

// grad_{x_t} log p_t(x_t | x_0) = -(x_t - mean_coef x_0) / lambda(t).
Matrix TrueScoreGaussian(const Matrix &xt, const Matrix &x0, double t,
                         const NoiseSchedule &schedule);

// Score of the noised marginal when every entry of X_0 is Normal(m, s^2):
//   -(x_t - mean_coef m) / (mean_coef^2 s^2 + lambda(t)).
// s = 0 coincides with TrueScoreGaussian at x_0 = m.
Matrix GaussianDataScore(const Matrix &xt, double data_mean, double data_std, double t,
                         const NoiseSchedule &schedule);

// One Euler-Maruyama step of the reverse SDE from t to t - 1/N:
//   x + beta(t)/N (x/2 + score) [+ sqrt(beta(t)/N) z].
Matrix ReverseStep(const Matrix &xt, double t, const Matrix &score,
                   const NoiseSchedule &schedule, const SamplerConfig &cfg, Rng &rng);

// Starts from Normal(0, I) and walks t = 1, (N-1)/N, ..., 1/N. `score_fn` is
// called as score_fn(x, t, conditioning) and must return a finite matrix of
// x's shape; otherwise NumericError names the failing step.
template <class ScoreFn, class Conditioning>
Matrix ReverseSample(ScoreFn &&score_fn, Index rows, Index cols,
                     const Conditioning &conditioning, const NoiseSchedule &schedule,
                     const SamplerConfig &cfg, Rng &rng) {
  schedule.Validate();
  cfg.Validate();
  Matrix x = StandardNormal(rows, cols, rng);
  const int n = cfg.n_steps;
  for (int step = n; step >= 1; --step) {
    const double t = static_cast<double>(step) / n;
    Matrix score = score_fn(static_cast<const Matrix &>(x), t, conditioning);
    if (score.rows() != rows || score.cols() != cols || !score.allFinite())
      throw NumericError("reverse sampler: score function returned a non-finite or "
                         "misshapen value at step " + std::to_string(n - step) +
                         " (t=" + std::to_string(t) + ")");
    x = ReverseStep(x, t, score, schedule, cfg, rng);
  }
  return x;
}

// Signature of a differentiable score network: (x_t, mu, t, Z_s) -> score.
using ScoreNetFn =
    std::function<ag::Var(const ag::Var &xt, const ag::Var &mu, double t, const ag::Var &zs)>;

// Below this variance a training sample is rejected and t redrawn.
inline constexpr double kMinTrainingVariance = 1e-8;
inline constexpr double kDefaultMinTrainingTime = 1e-3;

// Mean over elements of ||score_net(x_t, mu, t, Z_s) + eps / lambda(t)||^2
// with (x_t, eps) drawn by ForwardSample. Returns nullopt when lambda(t) is
// below kMinTrainingVariance; the caller should redraw t.
std::optional<ag::Var> ScoreMatchingLoss(const ScoreNetFn &score_net, const Matrix &x0,
                                         const ag::Var &mu, const ag::Var &zs, double t,
                                         const NoiseSchedule &schedule, Rng &rng);
// Replays a fixed forward draw instead of sampling one.
std::optional<ag::Var> ScoreMatchingLossFromDraw(const ScoreNetFn &score_net,
                                                 const ForwardDraw &draw, const ag::Var &mu,
                                                 const ag::Var &zs, double t,
                                                 const NoiseSchedule &schedule);

// Clean-sample estimate implied by a score: (x_t + lambda(t) * score) / mean_coef(t).
// Exact when `score` is the conditional score of the draw.
ag::Var EstimateX0(const ag::Var &xt, const ag::Var &score, double t,
                   const NoiseSchedule &schedule);

// Uniform on (t_min, 1], redrawn while lambda(t) < kMinTrainingVariance.
double SampleTrainingTime(const NoiseSchedule &schedule, Rng &rng,
                          double t_min = kDefaultMinTrainingTime);

}  // namespace edlab

#endif  // EDLAB_DIFFUSION_H_
