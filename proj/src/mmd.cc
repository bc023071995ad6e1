// src/mmd.cc

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

#include "edlab/mmd.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace edlab {

void KernelConfig::Validate() const {
  if (bandwidths.empty()) throw DomainError("kernel needs at least one bandwidth");
  for (double b : bandwidths)
    if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("kernel bandwidths must be positive");
}

SoftLabelMatrix::SoftLabelMatrix(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.cols() < 1) throw DomainError("soft labels need at least one class");
  for (Index i = 0; i < weights_.rows(); ++i) {
    if ((weights_.row(i).array() < 0.0).any() || !weights_.row(i).allFinite())
      throw DomainError("soft label row " + std::to_string(i) + " has a negative entry");
    if (std::abs(weights_.row(i).sum() - 1.0) > 1e-6)
      throw DomainError("soft label row " + std::to_string(i) + " does not sum to 1");
  }
}

SoftLabelMatrix SoftLabelMatrix::OneHot(const std::vector<int> &labels, int num_classes) {
  Matrix w = Matrix::Zero(static_cast<Index>(labels.size()), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw DomainError("label out of range");
    w(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return SoftLabelMatrix(std::move(w));
}

void LayerActivations::Validate() const {
  if (layers.empty()) throw ShapeError("layer activations need at least one layer");
  for (const auto &l : layers)
    if (l.rows() != layers.front().rows())
      throw ShapeError("layer activations disagree on sample count");
}

double GaussianKernel(const Vector &x, const Vector &y, const KernelConfig &cfg) {
  if (x.size() != y.size()) throw ShapeError("GaussianKernel: dimension mismatch");
  cfg.Validate();
  const double d2 = (x - y).squaredNorm();
  double k = 0.0;
  for (double sigma : cfg.bandwidths) k += std::exp(-d2 / (2.0 * sigma * sigma));
  return k / static_cast<double>(cfg.bandwidths.size());
}

double MedianPairwiseDistance(const Matrix &points) {
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(points.rows() * (points.rows() - 1) / 2));
  for (Index i = 0; i < points.rows(); ++i)
    for (Index j = i + 1; j < points.rows(); ++j)
      d.push_back((points.row(i) - points.row(j)).norm());
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double m = *mid;
  if (d.size() % 2 == 0) m = 0.5 * (m + *std::max_element(d.begin(), mid));
  return m > 0.0 ? m : 1.0;
}

std::vector<double> ResolveBandwidths(const KernelConfig &cfg, const Matrix &s, const Matrix &t) {
  cfg.Validate();
  if (cfg.mode == BandwidthMode::kFixed) return cfg.bandwidths;
  Matrix joint(s.rows() + t.rows(), s.cols());
  joint << s, t;
  const double m = MedianPairwiseDistance(joint);
  std::vector<double> sigmas;
  for (double mult : cfg.bandwidths) sigmas.push_back(mult * m);
  return sigmas;
}

double SedTotalLoss(double ce_loss, double mlmmd_value, double lambda_weight) {
  if (lambda_weight < 0.0) throw DomainError("MLMMD weight must be non-negative");
  return ce_loss + lambda_weight * mlmmd_value;
}

namespace ag {

using edlab::ag::Var;

Var KernelMatrix(const Var &x, const Var &y, std::span<const double> sigmas) {
  Var d = edlab::ag::SquaredDistances(x, y);
  Var k;
  for (double sigma : sigmas) {
    Var term = edlab::ag::Exp(edlab::ag::Scale(d, -1.0 / (2.0 * sigma * sigma)));
    k = k.defined() ? edlab::ag::Add(k, term) : term;
  }
  return edlab::ag::Scale(k, 1.0 / static_cast<double>(sigmas.size()));
}

namespace {

void CheckPair(const Var &s, const Var &t) {
  if (s.rows() < 1 || t.rows() < 1) throw ShapeError("MMD needs non-empty sample sets");
  if (s.cols() != t.cols()) throw ShapeError("MMD sample dimensions differ");
}

// w_s' Kss w_s + w_t' Ktt w_t - 2 w_s' Kst w_t for column weight vectors.
Var WeightedDiscrepancy(const Var &kss, const Var &ktt, const Var &kst, const Matrix &ws,
                        const Matrix &wt) {
  using namespace edlab::ag;
  Var a = Constant(ws), b = Constant(wt);
  Var ss = MatMul(Transpose(a), MatMul(kss, a));
  Var tt = MatMul(Transpose(b), MatMul(ktt, b));
  Var st = MatMul(Transpose(a), MatMul(kst, b));
  return Sub(Add(ss, tt), Scale(st, 2.0));
}

}  // namespace

Var Mmd2(const Var &s, const Var &t, const KernelConfig &cfg) {
  using namespace edlab::ag;
  CheckPair(s, t);
  const std::vector<double> sigmas = ResolveBandwidths(cfg, s.value(), t.value());
  Var kss = KernelMatrix(s, s, sigmas);
  Var ktt = KernelMatrix(t, t, sigmas);
  Var kst = KernelMatrix(s, t, sigmas);
  // Summing the cross block in both storage orders makes Mmd2(s, t) and
  // Mmd2(t, s) bitwise equal.
  Var cross = Add(Mean(kst), Mean(Transpose(kst)));
  return Sub(Add(Mean(kss), Mean(ktt)), cross);
}

Var Lmmd2(const Var &s, const Var &t, const SoftLabelMatrix &ws, const SoftLabelMatrix &wt,
          const KernelConfig &cfg) {
  using namespace edlab::ag;
  CheckPair(s, t);
  if (ws.num_samples() != s.rows() || wt.num_samples() != t.rows())
    throw ShapeError("LMMD: soft label rows do not match samples");
  if (ws.num_classes() != wt.num_classes())
    throw ShapeError("LMMD: class counts differ between domains");
  const std::vector<double> sigmas = ResolveBandwidths(cfg, s.value(), t.value());
  Var kss = KernelMatrix(s, s, sigmas);
  Var ktt = KernelMatrix(t, t, sigmas);
  Var kst = KernelMatrix(s, t, sigmas);
  Var total;
  int used = 0;
  for (Index c = 0; c < ws.num_classes(); ++c) {
    const double mass_s = ws.weights().col(c).sum();
    const double mass_t = wt.weights().col(c).sum();
    if (mass_s < kMinClassMass || mass_t < kMinClassMass) continue;
    Var term = WeightedDiscrepancy(kss, ktt, kst, ws.weights().col(c) / mass_s,
                                   wt.weights().col(c) / mass_t);
    total = total.defined() ? Add(total, term) : term;
    ++used;
  }
  if (used == 0) throw DomainError("LMMD: every class is empty in one of the domains");
  return Scale(total, 1.0 / used);
}

Var Mlmmd2(std::span<const Var> s, std::span<const Var> t, const SoftLabelMatrix &ws,
           const SoftLabelMatrix &wt, const KernelConfig &cfg) {
  using namespace edlab::ag;
  if (s.size() != t.size() || s.empty())
    throw ShapeError("MLMMD: layer counts differ (" + std::to_string(s.size()) + " vs " +
                     std::to_string(t.size()) + ")");
  Var total;
  for (std::size_t l = 0; l < s.size(); ++l) {
    Var term = ag::Lmmd2(s[l], t[l], ws, wt, cfg);
    total = total.defined() ? Add(total, term) : term;
  }
  return Scale(total, 1.0 / static_cast<double>(s.size()));
}

Var MultiLayerMmd2(std::span<const Var> s, std::span<const Var> t, const KernelConfig &cfg) {
  using namespace edlab::ag;
  if (s.size() != t.size() || s.empty()) throw ShapeError("multi-layer MMD: layer counts differ");
  Var total;
  for (std::size_t l = 0; l < s.size(); ++l) {
    Var term = ag::Mmd2(s[l], t[l], cfg);
    total = total.defined() ? Add(total, term) : term;
  }
  return Scale(total, 1.0 / static_cast<double>(s.size()));
}

}  // namespace ag

namespace {

std::vector<ag::Var> ToConstants(const LayerActivations &acts) {
  acts.Validate();
  std::vector<ag::Var> out;
  for (const auto &l : acts.layers) out.push_back(edlab::ag::Constant(l));
  return out;
}

}  // namespace

double Mmd2(const Matrix &s, const Matrix &t, const KernelConfig &cfg) {
  return ag::Mmd2(edlab::ag::Constant(s), edlab::ag::Constant(t), cfg).scalar();
}

double Lmmd2(const Matrix &s, const Matrix &t, const SoftLabelMatrix &ws,
             const SoftLabelMatrix &wt, const KernelConfig &cfg) {
  return ag::Lmmd2(edlab::ag::Constant(s), edlab::ag::Constant(t), ws, wt, cfg).scalar();
}

double Mlmmd2(const LayerActivations &s, const LayerActivations &t, const SoftLabelMatrix &ws,
              const SoftLabelMatrix &wt, const KernelConfig &cfg) {
  const auto sv = ToConstants(s);
  const auto tv = ToConstants(t);
  return ag::Mlmmd2(sv, tv, ws, wt, cfg).scalar();
}

double MultiLayerMmd2(const LayerActivations &s, const LayerActivations &t,
                      const KernelConfig &cfg) {
  const auto sv = ToConstants(s);
  const auto tv = ToConstants(t);
  return ag::MultiLayerMmd2(sv, tv, cfg).scalar();
}

}  // namespace edlab
