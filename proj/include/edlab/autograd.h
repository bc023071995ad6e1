// include/edlab/autograd.h

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

#ifndef EDLAB_AUTOGRAD_H_
#define EDLAB_AUTOGRAD_H_

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "edlab/types.h"

namespace edlab::ag {

// A minimal reverse-mode engine over dense double matrices. Every op records
// its parents and a closure that pushes the output gradient back into them.
// Leaves created with Param() persist across graphs and accumulate gradients
// until ZeroGrad(); everything else is freed with the last Var referencing it.

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node &)> backward;

  void AccumulateGrad(const Matrix &g);
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Matrix &value() const { return node_->value; }
  Matrix &mutable_value() { return node_->value; }
  const Matrix &grad() const { return node_->grad; }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool defined() const { return static_cast<bool>(node_); }
  // Value of a 1x1 result.
  double scalar() const;

  const std::shared_ptr<Node> &node() const { return node_; }

  void ZeroGrad();

 private:
  std::shared_ptr<Node> node_;
};

// Leaf that does not receive gradients.
Var Constant(Matrix value);
// Leaf that accumulates gradients.
Var Param(Matrix value);

// Runs reverse accumulation from a 1x1 output.
void Backward(const Var &output);

Var MatMul(const Var &a, const Var &b);
Var Add(const Var &a, const Var &b);
Var Sub(const Var &a, const Var &b);
Var Mul(const Var &a, const Var &b);  // elementwise
Var Scale(const Var &a, double s);
Var AddScalar(const Var &a, double s);
// a (n x m) + row (1 x m) broadcast over rows.
Var AddRow(const Var &a, const Var &row);
Var Transpose(const Var &a);
Var Tanh(const Var &a);
Var Exp(const Var &a);
Var Square(const Var &a);
Var Sum(const Var &a);
Var Mean(const Var &a);
// 1 x m column means.
Var MeanRows(const Var &a);
Var RowSoftmax(const Var &a);
Var RowLogSoftmax(const Var &a);
Var ConcatCols(std::span<const Var> parts);
Var ConcatRows(std::span<const Var> parts);
Var SliceCols(const Var &a, Index start, Index count);
Var SliceRows(const Var &a, Index start, Index count);
// out[i] = a[i + offset], zero where i + offset is outside the rows of a.
Var ShiftRows(const Var &a, Index offset);
// out[i] = a[index[i]]; backward scatter-adds.
Var GatherRows(const Var &a, std::vector<Index> index);
// out[g] = mean of rows [start_g, start_g + len_g) of a.
Var SegmentMeanRows(const Var &a, std::vector<std::pair<Index, Index>> groups);
// D[i][j] = ||x_i - y_j||^2.
Var SquaredDistances(const Var &x, const Var &y);

}  // namespace edlab::ag

#endif  // EDLAB_AUTOGRAD_H_
