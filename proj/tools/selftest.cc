// tools/selftest.cc

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

#include "selftest.h"

#include <cmath>
#include <functional>

#include "edlab/diarization.h"
#include "edlab/diffusion.h"
#include "edlab/mmd.h"
#include "edlab/style-encoder.h"
#include "edlab/toy-models.h"
#include "json.hpp"

namespace edlab {

namespace {

using nlohmann::ordered_json;

struct Checker {
  std::ostream &log;
  ordered_json results = ordered_json::array();
  int failures = 0;

  void Record(const std::string &name, bool pass, double value, double bound) {
    results.push_back({{"check", name}, {"pass", pass}, {"value", value}, {"bound", bound}});
    if (!pass) ++failures;
    log << (pass ? "  ok   " : "  FAIL ") << name << "  value=" << value << " bound=" << bound
        << std::endl;
  }
  void Run(const std::string &name, const std::function<void()> &fn) {
    try {
      fn();
    } catch (const std::exception &e) {
      results.push_back({{"check", name}, {"pass", false}, {"error", e.what()}});
      ++failures;
      log << "  FAIL " << name << " threw: " << e.what() << std::endl;
    }
  }
};

double Simpson(const std::function<double(double)> &f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

SegmentList Segs(std::vector<Segment> s, double total) { return {std::move(s), total}; }

}  // namespace

SelftestReport RunSelftest(std::ostream &log) {
  Checker ck{log};
  const NoiseSchedule sched;

  ck.Run("cum_beta_vs_quadrature", [&] {
    double worst = 0.0;
    for (double t : {0.1, 0.5, 0.9, 1.0}) {
      const double q = Simpson([&](double u) { return sched.Beta(u); }, 0.0, t, 1000);
      worst = std::max(worst, std::abs(q - CumBeta(sched, t)));
    }
    ck.Record("cum_beta_vs_quadrature", worst < 1e-9, worst, 1e-9);
  });

  ck.Run("forward_marginal_monte_carlo", [&] {
    const int n = 100000;
    const double c = 2.0, t = 0.5;
    Rng rng(11);
    const ForwardDraw d = ForwardSample(Matrix::Constant(n, 1, c), t, sched, rng);
    const MarginalParams m = GetMarginalParams(sched, t);
    const double mean = d.xt.mean();
    const double var = (d.xt.array() - mean).square().sum() / (n - 1);
    const double z_mean = std::abs(mean - m.mean_coef * c) / std::sqrt(m.variance / n);
    const double z_var = std::abs(var - m.variance) / (m.variance * std::sqrt(2.0 / (n - 1)));
    ck.Record("forward_marginal_monte_carlo", z_mean < 3.0 && z_var < 3.0,
              std::max(z_mean, z_var), 3.0);
  });

  ck.Run("reverse_sampler_gaussian_oracle", [&] {
    Rng rng(5);
    SamplerConfig sc;
    sc.n_steps = 100;
    auto score = [&](const Matrix &x, double t, int) {
      return GaussianDataScore(x, 1.0, 0.5, t, sched);
    };
    const Matrix x = ReverseSample(score, 10000, 1, 0, sched, sc, rng);
    const double mean = x.mean();
    const double sd = std::sqrt((x.array() - mean).square().sum() / (x.size() - 1));
    const double err = std::max(std::abs(mean - 1.0), std::abs(sd - 0.5));
    ck.Record("reverse_sampler_gaussian_oracle", err < 0.05, err, 0.05);
  });

  ck.Run("score_loss_hand_case", [&] {
    // lambda = 0.25, eps = 0.5, zero network -> (0.5 / 0.25)^2.
    const double t = 0.25;
    const MarginalParams m = GetMarginalParams(sched, t);
    ForwardDraw d{Matrix::Zero(1, 1), Matrix::Constant(1, 1, 0.5)};
    ScoreNetFn zero = [](const ag::Var &xt, const ag::Var &, double, const ag::Var &) {
      return ag::Constant(Matrix::Zero(xt.rows(), xt.cols()));
    };
    const double expect = std::pow(0.5 / m.variance, 2);
    const auto loss = ScoreMatchingLossFromDraw(zero, d, ag::Constant(Matrix::Zero(1, 1)),
                                                ag::Constant(Matrix::Zero(1, 1)), t, sched);
    const double err = std::abs(loss->scalar() - expect) / expect;
    ck.Record("score_loss_hand_case", err < 1e-12, err, 1e-12);
  });

  ck.Run("score_net_grad_check", [&] {
    Rng rng(3);
    ToyScoreNet::Config c;
    c.n_mel = 4;
    c.cond_dim = 6;
    c.time_dim = 4;
    c.hidden = 8;
    ToyScoreNet net(c, sched, rng);
    const Matrix x0 = StandardNormal(5, 4, rng);
    const ag::Var mu = ag::Constant(StandardNormal(5, 4, rng));
    const ag::Var zs = ag::Constant(StandardNormal(5, 6, rng));
    const double t = 0.3;
    const ForwardDraw d = ForwardSample(x0, t, sched, rng);
    ScoreNetFn fn = [&net](const ag::Var &xt, const ag::Var &m, double tt, const ag::Var &z) {
      return net.Forward(xt, m, tt, z);
    };
    const double err = GradCheck(net.Parameters(), [&] {
      return *ScoreMatchingLossFromDraw(fn, d, mu, zs, t, sched);
    });
    ck.Record("score_net_grad_check", err < 1e-4, err, 1e-4);
  });

  KernelConfig fixed1;
  fixed1.mode = BandwidthMode::kFixed;
  fixed1.bandwidths = {1.0};

  ck.Run("mmd_self_zero", [&] {
    Rng rng(2);
    const Matrix s = StandardNormal(12, 3, rng);
    const double v = std::abs(Mmd2(s, s, KernelConfig{}));
    ck.Record("mmd_self_zero", v < 1e-12, v, 1e-12);
  });

  ck.Run("mmd_scalar_hand_case", [&] {
    const double v = Mmd2(Matrix::Zero(1, 1), Matrix::Ones(1, 1), fixed1);
    const double err = std::abs(v - (2.0 - 2.0 * std::exp(-0.5)));
    ck.Record("mmd_scalar_hand_case", err < 1e-12, err, 1e-12);
  });

  ck.Run("mmd_vs_naive_double_loop", [&] {
    Rng rng(21);
    KernelConfig multi;
    multi.mode = BandwidthMode::kFixed;
    multi.bandwidths = {0.5, 1.0, 2.0};
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const Matrix s = StandardNormal(4 + rep % 5, 3, rng);
      const Matrix t = StandardNormal(3 + rep % 4, 3, rng).array() + 0.5;
      double ss = 0, tt = 0, st = 0;
      for (Index i = 0; i < s.rows(); ++i)
        for (Index j = 0; j < s.rows(); ++j)
          ss += GaussianKernel(s.row(i).transpose(), s.row(j).transpose(), multi);
      for (Index i = 0; i < t.rows(); ++i)
        for (Index j = 0; j < t.rows(); ++j)
          tt += GaussianKernel(t.row(i).transpose(), t.row(j).transpose(), multi);
      for (Index i = 0; i < s.rows(); ++i)
        for (Index j = 0; j < t.rows(); ++j)
          st += GaussianKernel(s.row(i).transpose(), t.row(j).transpose(), multi);
      const double naive = ss / (s.rows() * s.rows()) + tt / (t.rows() * t.rows()) -
                           2.0 * st / (s.rows() * t.rows());
      worst = std::max(worst, std::abs(naive - Mmd2(s, t, multi)));
    }
    ck.Record("mmd_vs_naive_double_loop", worst < 1e-10, worst, 1e-10);
  });

  ck.Run("mlmmd_single_layer_single_class", [&] {
    Rng rng(8);
    const Matrix s = StandardNormal(6, 2, rng), t = StandardNormal(5, 2, rng);
    const LayerActivations ls{{s}}, lt{{t}};
    const double v = Mlmmd2(ls, lt, SoftLabelMatrix(Matrix::Ones(6, 1)),
                            SoftLabelMatrix(Matrix::Ones(5, 1)), fixed1);
    const double err = std::abs(v - Mmd2(s, t, fixed1));
    ck.Record("mlmmd_single_layer_single_class", err < 1e-12, err, 1e-12);
  });

  ck.Run("lmmd_hard_label_expansion", [&] {
    Rng rng(9);
    const Matrix s = StandardNormal(6, 2, rng), t = StandardNormal(7, 2, rng);
    const std::vector<int> ys = {0, 1, 0, 1, 1, 0}, yt = {1, 1, 0, 0, 1, 0, 1};
    double brute = 0.0;
    for (int c = 0; c < 2; ++c) {
      std::vector<Index> is, it;
      for (Index i = 0; i < 6; ++i)
        if (ys[i] == c) is.push_back(i);
      for (Index i = 0; i < 7; ++i)
        if (yt[i] == c) it.push_back(i);
      double a = 0, b = 0, x = 0;
      for (Index i : is)
        for (Index j : is) a += GaussianKernel(s.row(i).transpose(), s.row(j).transpose(), fixed1);
      for (Index i : it)
        for (Index j : it) b += GaussianKernel(t.row(i).transpose(), t.row(j).transpose(), fixed1);
      for (Index i : is)
        for (Index j : it) x += GaussianKernel(s.row(i).transpose(), t.row(j).transpose(), fixed1);
      const double ns = is.size(), nt = it.size();
      brute += a / (ns * ns) + b / (nt * nt) - 2.0 * x / (ns * nt);
    }
    brute /= 2.0;
    const double v = Lmmd2(s, t, SoftLabelMatrix::OneHot(ys, 2), SoftLabelMatrix::OneHot(yt, 2),
                           fixed1);
    const double err = std::abs(v - brute);
    ck.Record("lmmd_hard_label_expansion", err < 1e-10, err, 1e-10);
  });

  ck.Run("eder_hand_cases", [&] {
    const SegmentList ref = Segs({{0, 2, 0}, {2, 6, 1}, {6, 10, 0}}, 10);
    const SegmentList shifted = Segs({{0, 3, 0}, {3, 7, 1}, {7, 10, 0}}, 10);
    const SegmentList confused = Segs({{0, 2, 0}, {2, 6, 2}, {6, 10, 0}}, 10);
    const double err = std::max({std::abs(Eder(ref, ref)), std::abs(Eder(ref, shifted) - 0.2),
                                 std::abs(Eder(ref, confused) - 0.4)});
    ck.Record("eder_hand_cases", err < 1e-12, err, 1e-12);
  });

  ck.Run("attention_rows_and_permutation", [&] {
    Rng rng(13);
    double worst_rows = 0.0, worst_perm = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const AttentionParams p = AttentionParams::Init(8, 2, rng);
      const Matrix content = StandardNormal(5, 8, rng);
      const Matrix style = StandardNormal(7 + rep, 8, rng);
      const AttentionOutput out = CrossAttention(ag::Constant(content), ag::Constant(style), p);
      for (const Matrix &w : out.weights)
        worst_rows = std::max(worst_rows, (w.rowwise().sum().array() - 1.0).abs().maxCoeff());
      std::vector<Index> perm(static_cast<std::size_t>(style.rows()));
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Index>(i);
      std::shuffle(perm.begin(), perm.end(), rng);
      Matrix permuted(style.rows(), style.cols());
      for (Index i = 0; i < style.rows(); ++i) permuted.row(i) = style.row(perm[i]);
      const Matrix a = out.output.value();
      const Matrix b = CrossAttentionAlign({content}, permuted, p);
      worst_perm = std::max(worst_perm, (a - b).cwiseAbs().maxCoeff());
    }
    ck.Record("attention_weight_rows_sum_to_one", worst_rows < 1e-6, worst_rows, 1e-6);
    ck.Record("attention_key_value_permutation", worst_perm < 1e-10, worst_perm, 1e-10);
  });

  ordered_json j;
  j["failures"] = ck.failures;
  j["checks"] = ck.results;
  return {ck.failures, j.dump(2)};
}

}  // namespace edlab
