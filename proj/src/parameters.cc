// src/parameters.cc

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

#include "edlab/parameters.h"

#include <cmath>

namespace edlab {

Matrix UniformInit(Index rows, Index cols, Index fan_in, Rng &rng) {
  const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-a, a);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

std::size_t CountParameters(const std::vector<NamedParam> &params) {
  std::size_t n = 0;
  for (const auto &p : params) n += static_cast<std::size_t>(p.var.value().size());
  return n;
}

void ZeroGrads(const std::vector<NamedParam> &params) {
  for (const auto &p : params) {
    ag::Var v = p.var;
    v.ZeroGrad();
  }
}

void SetTrainable(const std::vector<NamedParam> &params, bool trainable) {
  for (const auto &p : params) {
    p.var.node()->requires_grad = trainable;
    if (!trainable) p.var.node()->grad.resize(0, 0);
  }
}

void SgdMomentum::Step(const std::vector<NamedParam> &params) {
  double scale = 1.0;
  if (max_grad_norm_ > 0.0) {
    double sq = 0.0;
    for (const auto &p : params)
      if (p.var.grad().size() != 0) sq += p.var.grad().squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > max_grad_norm_) scale = max_grad_norm_ / norm;
  }
  for (const auto &p : params) {
    const Matrix &g = p.var.grad();
    if (g.size() == 0) continue;
    Matrix &v = velocity_[p.var.node().get()];
    if (v.size() == 0) v = Matrix::Zero(g.rows(), g.cols());
    v = momentum_ * v + scale * g;
    p.var.node()->value -= lr_ * v;
  }
}

}  // namespace edlab
