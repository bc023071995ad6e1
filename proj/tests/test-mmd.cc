// tests/test-mmd.cc

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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "edlab/mmd.h"
#include "edlab/toy-models.h"
#include "test-util.h"

using namespace edlab;
using edlab::testing::NaiveKernel;
using edlab::testing::NaiveMmd;
using edlab::testing::NaiveWeightedMmd;

namespace {

KernelConfig Fixed(std::vector<double> sigmas) {
  KernelConfig k;
  k.bandwidths = std::move(sigmas);
  k.mode = BandwidthMode::kFixed;
  return k;
}

// Naive class-averaged weighted discrepancy.
double NaiveLmmd(const Matrix &s, const Matrix &t, const Matrix &ws, const Matrix &wt,
                 const std::vector<double> &sigmas) {
  double acc = 0.0;
  int used = 0;
  for (Index c = 0; c < ws.cols(); ++c) {
    const double ms = ws.col(c).sum(), mt = wt.col(c).sum();
    if (ms < 1e-8 || mt < 1e-8) continue;
    std::vector<double> a, b;
    for (Index i = 0; i < s.rows(); ++i) a.push_back(ws(i, c) / ms);
    for (Index j = 0; j < t.rows(); ++j) b.push_back(wt(j, c) / mt);
    acc += NaiveWeightedMmd(s, t, a, b, sigmas);
    ++used;
  }
  return acc / used;
}

Matrix RandomSoft(Index n, Index c, Rng &rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Matrix w(n, c);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
  for (Index i = 0; i < n; ++i) w.row(i) /= w.row(i).sum();
  return w;
}

}  // namespace

TEST_CASE("kernel hand values") {
  Vector x(1), y(1);
  x << 0.0;
  y << 1.0;
  CHECK(GaussianKernel(x, y, Fixed({1.0})) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(GaussianKernel(x, x, Fixed({0.5, 1.0, 2.0})) == 1.0);
  CHECK(GaussianKernel(x, y, Fixed({1.0, 2.0})) ==
        doctest::Approx(0.5 * (std::exp(-0.5) + std::exp(-0.125))).epsilon(1e-15));
  CHECK_THROWS_AS(GaussianKernel(x, Vector::Zero(2), Fixed({1.0})), ShapeError);
  CHECK_THROWS_AS(Fixed({}).Validate(), DomainError);
  CHECK_THROWS_AS(Fixed({1.0, -1.0}).Validate(), DomainError);
}

TEST_CASE("scalar hand case and self distance") {
  const Matrix s = Matrix::Zero(1, 1), t = Matrix::Ones(1, 1);
  CHECK(std::abs(Mmd2(s, t, Fixed({1.0})) - (2.0 - 2.0 * std::exp(-0.5))) < 1e-12);
  Rng rng(1);
  const Matrix x = StandardNormal(30, 5, rng);
  CHECK(std::abs(Mmd2(x, x, KernelConfig{})) < 1e-12);
  CHECK(std::abs(Mmd2(x, x, Fixed({0.3, 3.0}))) < 1e-12);
}

TEST_CASE("kernel-sum path matches the naive double loop") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 5 + trial % 7, m = 3 + trial % 5, d = 1 + trial % 8;
    const Matrix s = StandardNormal(n, d, rng);
    const Matrix t = StandardNormal(m, d, rng).array() + 0.5;
    const KernelConfig k = Fixed({0.5 + 0.1 * trial, 2.0});
    CHECK(std::abs(Mmd2(s, t, k) - NaiveMmd(s, t, k.bandwidths)) < 1e-10);
    // median mode resolves concrete sigmas first
    const std::vector<double> sig = ResolveBandwidths(KernelConfig{}, s, t);
    CHECK(std::abs(Mmd2(s, t, KernelConfig{}) - NaiveMmd(s, t, sig)) < 1e-10);
  }
  const Matrix big_s = StandardNormal(50, 8, rng), big_t = StandardNormal(50, 8, rng);
  CHECK(std::abs(Mmd2(big_s, big_t, Fixed({1.0, 4.0})) - NaiveMmd(big_s, big_t, {1.0, 4.0})) < 1e-10);
}

TEST_CASE("median heuristic against a sorted list") {
  Rng rng(3);
  for (Index n : {2, 3, 4, 7}) {
    const Matrix p = StandardNormal(n, 3, rng);
    std::vector<double> d;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) d.push_back((p.row(i) - p.row(j)).norm());
    std::sort(d.begin(), d.end());
    const std::size_t k = d.size();
    const double med = k % 2 ? d[k / 2] : 0.5 * (d[k / 2 - 1] + d[k / 2]);
    CHECK(MedianPairwiseDistance(p) == doctest::Approx(med).epsilon(1e-14));
  }
  CHECK(MedianPairwiseDistance(Matrix::Zero(4, 2)) == 1.0);
  const auto sig = ResolveBandwidths(KernelConfig{}, Matrix::Zero(1, 1), Matrix::Constant(1, 1, 3.0));
  CHECK(sig == std::vector<double>{1.5, 3.0, 6.0});
}

TEST_CASE("property: symmetry, non-negativity, permutation invariance") {
  Rng rng(4);
  for (int trial = 0; trial < 25; ++trial) {
    const Matrix s = StandardNormal(6 + trial % 4, 3, rng);
    const Matrix t = StandardNormal(4 + trial % 5, 3, rng) * 1.5;
    const KernelConfig k;
    const double a = Mmd2(s, t, k);
    CHECK(a >= -1e-12);
    CHECK(std::abs(a - Mmd2(t, s, k)) < 1e-12);
    const auto p = edlab::testing::RandomPermutation(s.rows(), rng);
    CHECK(std::abs(a - Mmd2(edlab::testing::PermuteRows(s, p), t, k)) < 1e-12);
  }
}

TEST_CASE("same distribution scores below a shifted one") {
  Rng rng(5);
  const KernelConfig k;
  int wins = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = StandardNormal(40, 4, rng), b = StandardNormal(40, 4, rng);
    const Matrix c = StandardNormal(40, 4, rng).array() + 1.0;
    if (Mmd2(a, b, k) < Mmd2(a, c, k)) ++wins;
  }
  CHECK(wins == 100);
}

TEST_CASE("soft label validation") {
  CHECK_THROWS_AS(SoftLabelMatrix((Matrix(1, 2) << 0.7, 0.7).finished()), DomainError);
  CHECK_THROWS_AS(SoftLabelMatrix((Matrix(1, 2) << 1.5, -0.5).finished()), DomainError);
  CHECK_THROWS_AS(SoftLabelMatrix::OneHot({0, 3}, 3), DomainError);
  const SoftLabelMatrix oh = SoftLabelMatrix::OneHot({1, 0, 2}, 3);
  CHECK(oh.weights()(0, 1) == 1.0);
  CHECK(oh.weights().sum() == 3.0);
}

TEST_CASE("single layer, single class reduces to plain MMD") {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix s = StandardNormal(7, 3, rng), t = StandardNormal(5, 3, rng).array() + 0.3;
    LayerActivations ls{{s}}, lt{{t}};
    const SoftLabelMatrix ws(Matrix::Ones(7, 1)), wt(Matrix::Ones(5, 1));
    const KernelConfig k;
    CHECK(std::abs(Mlmmd2(ls, lt, ws, wt, k) - Mmd2(s, t, k)) < 1e-12);
    CHECK(std::abs(MultiLayerMmd2(ls, lt, k) - Mmd2(s, t, k)) < 1e-12);
  }
}

TEST_CASE("hard-label two-class case matches the weighted expansion") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix s = StandardNormal(8, 2, rng), t = StandardNormal(6, 2, rng).array() + 0.4;
    const std::vector<int> ls = {0, 1, 0, 1, 1, 0, 0, 1}, lt = {1, 1, 0, 0, 1, 0};
    const SoftLabelMatrix ws = SoftLabelMatrix::OneHot(ls, 2), wt = SoftLabelMatrix::OneHot(lt, 2);
    const KernelConfig k = Fixed({0.7, 1.9});
    CHECK(std::abs(Lmmd2(s, t, ws, wt, k) - NaiveLmmd(s, t, ws.weights(), wt.weights(), k.bandwidths)) <
          1e-10);
  }
}

TEST_CASE("soft weights and empty classes") {
  Rng rng(8);
  const Matrix s = StandardNormal(9, 3, rng), t = StandardNormal(7, 3, rng);
  const Matrix ws = RandomSoft(9, 3, rng), wt = RandomSoft(7, 3, rng);
  const KernelConfig k = Fixed({1.0});
  CHECK(std::abs(Lmmd2(s, t, SoftLabelMatrix(ws), SoftLabelMatrix(wt), k) -
                 NaiveLmmd(s, t, ws, wt, k.bandwidths)) < 1e-10);
  // class 2 absent in the target: averaged over the remaining two
  const std::vector<int> lt = {0, 1, 0, 1, 0, 1, 1};
  const Matrix wt2 = SoftLabelMatrix::OneHot(lt, 3).weights();
  CHECK(std::abs(Lmmd2(s, t, SoftLabelMatrix(ws), SoftLabelMatrix(wt2), k) -
                 NaiveLmmd(s, t, ws, wt2, k.bandwidths)) < 1e-10);
  // no shared class at all
  CHECK_THROWS_AS(Lmmd2(s.topRows(2), t.topRows(2), SoftLabelMatrix::OneHot({0, 0}, 2),
                        SoftLabelMatrix::OneHot({1, 1}, 2), k),
                  DomainError);
}

TEST_CASE("two layers average the per-layer values") {
  Rng rng(9);
  const Matrix s1 = StandardNormal(6, 3, rng), t1 = StandardNormal(5, 3, rng);
  const Matrix s2 = StandardNormal(6, 2, rng), t2 = StandardNormal(5, 2, rng).array() + 1.0;
  const SoftLabelMatrix ws(RandomSoft(6, 2, rng)), wt(RandomSoft(5, 2, rng));
  const KernelConfig k;
  const double want = 0.5 * (Lmmd2(s1, t1, ws, wt, k) + Lmmd2(s2, t2, ws, wt, k));
  CHECK(std::abs(Mlmmd2({{s1, s2}}, {{t1, t2}}, ws, wt, k) - want) < 1e-12);
  CHECK(std::abs(MultiLayerMmd2({{s1, s2}}, {{t1, t2}}, k) -
                 0.5 * (Mmd2(s1, t1, k) + Mmd2(s2, t2, k))) < 1e-12);
  CHECK_THROWS_AS(Mlmmd2({{s1, s2}}, {{t1}}, ws, wt, k), ShapeError);
  CHECK_THROWS_AS(Lmmd2(s1, t1, wt, wt, k), ShapeError);
  CHECK_THROWS_AS(Mmd2(s1, t2, k), ShapeError);
  CHECK_THROWS_AS((LayerActivations{{s1, t1}}.Validate()), ShapeError);
}

TEST_CASE("total SED loss") {
  CHECK(SedTotalLoss(1.0, 0.4, 0.5) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(SedTotalLoss(0.3, 9.0, 0.0) == 0.3);
  CHECK_THROWS_AS(SedTotalLoss(1.0, 0.4, -0.1), DomainError);
}

TEST_CASE("differentiable MMD and MLMMD gradients") {
  Rng rng(10);
  ag::Var s = ag::Param(StandardNormal(6, 3, rng));
  ag::Var t = ag::Param(StandardNormal(5, 3, rng).array() + 0.5);
  std::vector<NamedParam> params = {{"s", s}, {"t", t}};
  const KernelConfig k = Fixed({1.0, 2.0});
  GradCheckOptions opts;
  opts.fraction = 1.0;
  CHECK(GradCheck(params, [&] { return ag::Mmd2(s, t, k); }, opts) < 1e-6);
  const SoftLabelMatrix ws(RandomSoft(6, 3, rng)), wt(RandomSoft(5, 3, rng));
  CHECK(GradCheck(params, [&] { return ag::Lmmd2(s, t, ws, wt, k); }, opts) < 1e-6);
  const ag::Var ls[] = {s, ag::Tanh(s)}, lt[] = {t, ag::Tanh(t)};
  CHECK(ag::Mlmmd2(ls, lt, ws, wt, k).scalar() ==
        doctest::Approx(Mlmmd2({{s.value(), s.value().array().tanh().matrix()}},
                               {{t.value(), t.value().array().tanh().matrix()}}, ws, wt, k))
            .epsilon(1e-12));
  CHECK(GradCheck(params,
                  [&] {
                    const ag::Var a[] = {s, ag::Tanh(s)}, b[] = {t, ag::Tanh(t)};
                    return ag::Mlmmd2(a, b, ws, wt, k);
                  },
                  opts) < 1e-6);
}
