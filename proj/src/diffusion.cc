// src/diffusion.cc

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

#include "edlab/diffusion.h"

#include <cmath>

namespace edlab {

namespace {

void CheckTime(double t, bool allow_zero, const char *op) {
  const bool ok = allow_zero ? (t >= 0.0 && t <= 1.0) : (t > 0.0 && t <= 1.0);
  if (!ok || std::isnan(t))
    throw DomainError(std::string(op) + ": time " + std::to_string(t) + " outside " +
                      (allow_zero ? "[0, 1]" : "(0, 1]"));
}

}  // namespace

void NoiseSchedule::Validate() const {
  if (!(beta0 > 0.0) || !(beta1 >= beta0) || !std::isfinite(beta1))
    throw DomainError("noise schedule needs 0 < beta0 <= beta1, got beta0=" +
                      std::to_string(beta0) + " beta1=" + std::to_string(beta1));
}

void DiffusionState::Validate() const {
  CheckTime(t, true, "DiffusionState");
  if (!x.allFinite()) throw NumericError("DiffusionState: non-finite x");
}

void SamplerConfig::Validate() const {
  if (n_steps < 1) throw DomainError("sampler needs n_steps >= 1");
}

double CumBeta(const NoiseSchedule &schedule, double t) {
  CheckTime(t, true, "CumBeta");
  return schedule.beta0 * t + 0.5 * (schedule.beta1 - schedule.beta0) * t * t;
}

MarginalParams GetMarginalParams(const NoiseSchedule &schedule, double t) {
  const double b = CumBeta(schedule, t);
  return {std::exp(-0.5 * b), -std::expm1(-b)};
}

ForwardDraw ForwardSampleFromNoise(const Matrix &x0, double t, const NoiseSchedule &schedule,
                                   const Matrix &z) {
  CheckTime(t, false, "ForwardSample");
  if (z.rows() != x0.rows() || z.cols() != x0.cols())
    throw ShapeError("ForwardSample: noise shape differs from x0");
  const MarginalParams m = GetMarginalParams(schedule, t);
  ForwardDraw out;
  out.eps = std::sqrt(m.variance) * z;
  out.xt = m.mean_coef * x0 + out.eps;
  return out;
}

ForwardDraw ForwardSample(const Matrix &x0, double t, const NoiseSchedule &schedule, Rng &rng) {
  CheckTime(t, false, "ForwardSample");
  return ForwardSampleFromNoise(x0, t, schedule, StandardNormal(x0.rows(), x0.cols(), rng));
}

Matrix TrueScoreGaussian(const Matrix &xt, const Matrix &x0, double t,
                         const NoiseSchedule &schedule) {
  CheckTime(t, false, "TrueScoreGaussian");
  if (xt.rows() != x0.rows() || xt.cols() != x0.cols())
    throw ShapeError("TrueScoreGaussian: x_t and x_0 shapes differ");
  const MarginalParams m = GetMarginalParams(schedule, t);
  return -(xt - m.mean_coef * x0) / m.variance;
}

Matrix GaussianDataScore(const Matrix &xt, double data_mean, double data_std, double t,
                         const NoiseSchedule &schedule) {
  CheckTime(t, false, "GaussianDataScore");
  if (data_std < 0.0) throw DomainError("GaussianDataScore: negative data std");
  const MarginalParams m = GetMarginalParams(schedule, t);
  const double var = m.mean_coef * m.mean_coef * data_std * data_std + m.variance;
  return -(xt.array() - m.mean_coef * data_mean).matrix() / var;
}

Matrix ReverseStep(const Matrix &xt, double t, const Matrix &score,
                   const NoiseSchedule &schedule, const SamplerConfig &cfg, Rng &rng) {
  if (score.rows() != xt.rows() || score.cols() != xt.cols())
    throw ShapeError("ReverseStep: score shape differs from x_t");
  const double h = schedule.Beta(t) / cfg.n_steps;
  Matrix out = xt + h * (0.5 * xt + score);
  if (cfg.stochastic) out += std::sqrt(h) * StandardNormal(xt.rows(), xt.cols(), rng);
  return out;
}

std::optional<ag::Var> ScoreMatchingLossFromDraw(const ScoreNetFn &score_net,
                                                 const ForwardDraw &draw, const ag::Var &mu,
                                                 const ag::Var &zs, double t,
                                                 const NoiseSchedule &schedule) {
  const MarginalParams m = GetMarginalParams(schedule, t);
  if (m.variance < kMinTrainingVariance) return std::nullopt;
  ag::Var predicted = score_net(ag::Constant(draw.xt), mu, t, zs);
  if (predicted.rows() != draw.xt.rows() || predicted.cols() != draw.xt.cols())
    throw ShapeError("score network output shape differs from x_t");
  ag::Var target = ag::Constant(draw.eps / m.variance);
  return ag::Mean(ag::Square(ag::Add(predicted, target)));
}

std::optional<ag::Var> ScoreMatchingLoss(const ScoreNetFn &score_net, const Matrix &x0,
                                         const ag::Var &mu, const ag::Var &zs, double t,
                                         const NoiseSchedule &schedule, Rng &rng) {
  return ScoreMatchingLossFromDraw(score_net, ForwardSample(x0, t, schedule, rng), mu, zs, t,
                                   schedule);
}

ag::Var EstimateX0(const ag::Var &xt, const ag::Var &score, double t,
                   const NoiseSchedule &schedule) {
  CheckTime(t, false, "EstimateX0");
  const MarginalParams m = GetMarginalParams(schedule, t);
  return ag::Scale(ag::Add(xt, ag::Scale(score, m.variance)), 1.0 / m.mean_coef);
}

double SampleTrainingTime(const NoiseSchedule &schedule, Rng &rng, double t_min) {
  if (!(t_min >= 0.0 && t_min < 1.0)) throw DomainError("t_min must lie in [0, 1)");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (;;) {
    // 1 - u maps [0, 1) onto (0, 1], so the draw lands in (t_min, 1].
    const double t = t_min + (1.0 - t_min) * (1.0 - uniform(rng));
    if (t > t_min && GetMarginalParams(schedule, t).variance >= kMinTrainingVariance) return t;
  }
}

}  // namespace edlab
