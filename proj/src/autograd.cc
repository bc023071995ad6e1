// src/autograd.cc

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

#include "edlab/autograd.h"

#include <string>
#include <unordered_set>

namespace edlab::ag {

void Node::AccumulateGrad(const Matrix &g) {
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

double Var::scalar() const {
  if (rows() != 1 || cols() != 1)
    throw ShapeError("scalar() on a " + std::to_string(rows()) + "x" +
                     std::to_string(cols()) + " value");
  return node_->value(0, 0);
}

void Var::ZeroGrad() {
  if (node_) node_->grad.resize(0, 0);
}

Var Constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(std::move(n));
}

Var Param(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(std::move(n));
}

namespace {

// Builds a node from parents; it tracks gradients iff any parent does.
Var MakeNode(Matrix value, std::vector<std::shared_ptr<Node>> parents,
             std::function<void(Node &)> backward) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto &p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward = std::move(backward);
  }
  return Var(std::move(n));
}

void RequireSameShape(const Var &a, const Var &b, const char *op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

inline void Push(const std::shared_ptr<Node> &p, const Matrix &g) {
  if (p->requires_grad) p->AccumulateGrad(g);
}

}  // namespace

void Backward(const Var &output) {
  if (output.rows() != 1 || output.cols() != 1)
    throw ShapeError("Backward needs a 1x1 output");
  if (!output.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node *> order;
  std::unordered_set<Node *> seen;
  std::vector<std::pair<Node *, std::size_t>> stack;
  stack.emplace_back(output.node().get(), 0);
  seen.insert(output.node().get());
  while (!stack.empty()) {
    auto &[node, next] = stack.back();
    if (next < node->parents.size()) {
      Node *p = node->parents[next++].get();
      if (p->requires_grad && !p->parents.empty() && seen.insert(p).second)
        stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  output.node()->AccumulateGrad(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node *n = *it;
    if (n->backward && n->grad.size() != 0) n->backward(*n);
    // Interior gradients are not needed after propagation.
    if (!n->parents.empty() && n != output.node().get()) n->grad.resize(0, 0);
  }
}

Var MatMul(const Var &a, const Var &b) {
  if (a.cols() != b.rows())
    throw ShapeError("MatMul: inner dimensions " + std::to_string(a.cols()) +
                     " and " + std::to_string(b.rows()));
  auto pa = a.node(), pb = b.node();
  return MakeNode(a.value() * b.value(), {pa, pb}, [pa, pb](Node &n) {
    if (pa->requires_grad) pa->AccumulateGrad(n.grad * pb->value.transpose());
    if (pb->requires_grad) pb->AccumulateGrad(pa->value.transpose() * n.grad);
  });
}

Var Add(const Var &a, const Var &b) {
  RequireSameShape(a, b, "Add");
  auto pa = a.node(), pb = b.node();
  return MakeNode(a.value() + b.value(), {pa, pb}, [pa, pb](Node &n) {
    Push(pa, n.grad);
    Push(pb, n.grad);
  });
}

Var Sub(const Var &a, const Var &b) {
  RequireSameShape(a, b, "Sub");
  auto pa = a.node(), pb = b.node();
  return MakeNode(a.value() - b.value(), {pa, pb}, [pa, pb](Node &n) {
    Push(pa, n.grad);
    if (pb->requires_grad) pb->AccumulateGrad(-n.grad);
  });
}

Var Mul(const Var &a, const Var &b) {
  RequireSameShape(a, b, "Mul");
  auto pa = a.node(), pb = b.node();
  return MakeNode(a.value().cwiseProduct(b.value()), {pa, pb}, [pa, pb](Node &n) {
    if (pa->requires_grad) pa->AccumulateGrad(n.grad.cwiseProduct(pb->value));
    if (pb->requires_grad) pb->AccumulateGrad(n.grad.cwiseProduct(pa->value));
  });
}

Var Scale(const Var &a, double s) {
  auto pa = a.node();
  return MakeNode(a.value() * s, {pa}, [pa, s](Node &n) { Push(pa, n.grad * s); });
}

Var AddScalar(const Var &a, double s) {
  auto pa = a.node();
  return MakeNode(a.value().array() + s, {pa}, [pa](Node &n) { Push(pa, n.grad); });
}

Var AddRow(const Var &a, const Var &row) {
  if (row.rows() != 1 || row.cols() != a.cols())
    throw ShapeError("AddRow: row must be 1x" + std::to_string(a.cols()));
  auto pa = a.node(), pr = row.node();
  Matrix out = a.value();
  out.rowwise() += pr->value.row(0);
  return MakeNode(std::move(out), {pa, pr}, [pa, pr](Node &n) {
    Push(pa, n.grad);
    if (pr->requires_grad) pr->AccumulateGrad(n.grad.colwise().sum());
  });
}

Var Transpose(const Var &a) {
  auto pa = a.node();
  return MakeNode(a.value().transpose(), {pa},
                  [pa](Node &n) { Push(pa, n.grad.transpose()); });
}

Var Tanh(const Var &a) {
  auto pa = a.node();
  Matrix out = a.value().array().tanh();
  return MakeNode(out, {pa}, [pa, out](Node &n) {
    if (pa->requires_grad)
      pa->AccumulateGrad((n.grad.array() * (1.0 - out.array().square())).matrix());
  });
}

Var Exp(const Var &a) {
  auto pa = a.node();
  Matrix out = a.value().array().exp();
  return MakeNode(out, {pa}, [pa, out](Node &n) {
    if (pa->requires_grad) pa->AccumulateGrad(n.grad.cwiseProduct(out));
  });
}

Var Square(const Var &a) {
  auto pa = a.node();
  return MakeNode(a.value().array().square(), {pa}, [pa](Node &n) {
    if (pa->requires_grad) pa->AccumulateGrad(2.0 * n.grad.cwiseProduct(pa->value));
  });
}

Var Sum(const Var &a) {
  auto pa = a.node();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return MakeNode(std::move(out), {pa}, [pa](Node &n) {
    if (pa->requires_grad)
      pa->AccumulateGrad(Matrix::Constant(pa->value.rows(), pa->value.cols(), n.grad(0, 0)));
  });
}

Var Mean(const Var &a) {
  if (a.value().size() == 0) throw ShapeError("Mean of an empty matrix");
  return Scale(Sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var MeanRows(const Var &a) {
  if (a.rows() == 0) throw ShapeError("MeanRows of an empty matrix");
  auto pa = a.node();
  const double inv = 1.0 / static_cast<double>(a.rows());
  return MakeNode(a.value().colwise().mean(), {pa}, [pa, inv](Node &n) {
    if (pa->requires_grad)
      pa->AccumulateGrad(n.grad.replicate(pa->value.rows(), 1) * inv);
  });
}

Var RowSoftmax(const Var &a) {
  auto pa = a.node();
  Matrix out = a.value();
  for (Index i = 0; i < out.rows(); ++i) {
    out.row(i).array() -= out.row(i).maxCoeff();
    out.row(i) = out.row(i).array().exp();
    out.row(i) /= out.row(i).sum();
  }
  return MakeNode(out, {pa}, [pa, out](Node &n) {
    if (!pa->requires_grad) return;
    Matrix g(out.rows(), out.cols());
    for (Index i = 0; i < out.rows(); ++i) {
      const double dot = n.grad.row(i).dot(out.row(i));
      g.row(i) = out.row(i).array() * (n.grad.row(i).array() - dot);
    }
    pa->AccumulateGrad(g);
  });
}

Var RowLogSoftmax(const Var &a) {
  auto pa = a.node();
  Matrix out = a.value();
  for (Index i = 0; i < out.rows(); ++i) {
    const double m = out.row(i).maxCoeff();
    const double lse = m + std::log((out.row(i).array() - m).exp().sum());
    out.row(i).array() -= lse;
  }
  return MakeNode(out, {pa}, [pa, out](Node &n) {
    if (!pa->requires_grad) return;
    Matrix g(out.rows(), out.cols());
    for (Index i = 0; i < out.rows(); ++i) {
      const double total = n.grad.row(i).sum();
      g.row(i) = n.grad.row(i).array() - out.row(i).array().exp() * total;
    }
    pa->AccumulateGrad(g);
  });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("ConcatCols of nothing");
  const Index rows = parts[0].rows();
  Index cols = 0;
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto &p : parts) {
    if (p.rows() != rows) throw ShapeError("ConcatCols: row count mismatch");
    cols += p.cols();
    parents.push_back(p.node());
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const auto &p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  auto ps = parents;
  return MakeNode(std::move(out), std::move(parents), [ps](Node &n) {
    Index at = 0;
    for (const auto &p : ps) {
      const Index c = p->value.cols();
      if (p->requires_grad) p->AccumulateGrad(n.grad.middleCols(at, c));
      at += c;
    }
  });
}

Var ConcatRows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("ConcatRows of nothing");
  const Index cols = parts[0].cols();
  Index rows = 0;
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto &p : parts) {
    if (p.cols() != cols) throw ShapeError("ConcatRows: column count mismatch");
    rows += p.rows();
    parents.push_back(p.node());
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const auto &p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  auto ps = parents;
  return MakeNode(std::move(out), std::move(parents), [ps](Node &n) {
    Index at = 0;
    for (const auto &p : ps) {
      const Index r = p->value.rows();
      if (p->requires_grad) p->AccumulateGrad(n.grad.middleRows(at, r));
      at += r;
    }
  });
}

Var SliceCols(const Var &a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols())
    throw ShapeError("SliceCols out of range");
  auto pa = a.node();
  return MakeNode(a.value().middleCols(start, count), {pa}, [pa, start, count](Node &n) {
    if (!pa->requires_grad) return;
    Matrix g = Matrix::Zero(pa->value.rows(), pa->value.cols());
    g.middleCols(start, count) = n.grad;
    pa->AccumulateGrad(g);
  });
}

Var SliceRows(const Var &a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.rows())
    throw ShapeError("SliceRows out of range");
  auto pa = a.node();
  return MakeNode(a.value().middleRows(start, count), {pa}, [pa, start, count](Node &n) {
    if (!pa->requires_grad) return;
    Matrix g = Matrix::Zero(pa->value.rows(), pa->value.cols());
    g.middleRows(start, count) = n.grad;
    pa->AccumulateGrad(g);
  });
}

Var ShiftRows(const Var &a, Index offset) {
  auto pa = a.node();
  const Index rows = a.rows();
  Matrix out = Matrix::Zero(rows, a.cols());
  const Index lo = std::max<Index>(0, -offset);
  const Index hi = std::min<Index>(rows, rows - offset);
  if (hi > lo) out.middleRows(lo, hi - lo) = a.value().middleRows(lo + offset, hi - lo);
  return MakeNode(std::move(out), {pa}, [pa, lo, hi, offset](Node &n) {
    if (!pa->requires_grad) return;
    Matrix g = Matrix::Zero(pa->value.rows(), pa->value.cols());
    if (hi > lo) g.middleRows(lo + offset, hi - lo) = n.grad.middleRows(lo, hi - lo);
    pa->AccumulateGrad(g);
  });
}

Var GatherRows(const Var &a, std::vector<Index> index) {
  auto pa = a.node();
  Matrix out(static_cast<Index>(index.size()), a.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= a.rows()) throw ShapeError("GatherRows index out of range");
    out.row(static_cast<Index>(i)) = a.value().row(index[i]);
  }
  return MakeNode(std::move(out), {pa}, [pa, index = std::move(index)](Node &n) {
    if (!pa->requires_grad) return;
    Matrix g = Matrix::Zero(pa->value.rows(), pa->value.cols());
    for (std::size_t i = 0; i < index.size(); ++i) g.row(index[i]) += n.grad.row(static_cast<Index>(i));
    pa->AccumulateGrad(g);
  });
}

Var SegmentMeanRows(const Var &a, std::vector<std::pair<Index, Index>> groups) {
  auto pa = a.node();
  Matrix out(static_cast<Index>(groups.size()), a.cols());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto [start, len] = groups[g];
    if (len <= 0 || start < 0 || start + len > a.rows())
      throw ShapeError("SegmentMeanRows: bad group");
    out.row(static_cast<Index>(g)) = a.value().middleRows(start, len).colwise().mean();
  }
  return MakeNode(std::move(out), {pa}, [pa, groups = std::move(groups)](Node &n) {
    if (!pa->requires_grad) return;
    Matrix g = Matrix::Zero(pa->value.rows(), pa->value.cols());
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const auto [start, len] = groups[k];
      g.middleRows(start, len).rowwise() +=
          n.grad.row(static_cast<Index>(k)) / static_cast<double>(len);
    }
    pa->AccumulateGrad(g);
  });
}

Var SquaredDistances(const Var &x, const Var &y) {
  if (x.cols() != y.cols()) throw ShapeError("SquaredDistances: dimension mismatch");
  auto px = x.node(), py = y.node();
  const Matrix &xv = x.value();
  const Matrix &yv = y.value();
  Matrix d(xv.rows(), yv.rows());
  for (Index i = 0; i < xv.rows(); ++i)
    for (Index j = 0; j < yv.rows(); ++j) d(i, j) = (xv.row(i) - yv.row(j)).squaredNorm();
  return MakeNode(std::move(d), {px, py}, [px, py](Node &n) {
    // dD_ij/dx_i = 2 (x_i - y_j), dD_ij/dy_j = -2 (x_i - y_j)
    const Matrix &g = n.grad;
    const Vector row_sum = g.rowwise().sum();
    const Vector col_sum = g.colwise().sum().transpose();
    if (px->requires_grad) {
      Matrix gx = 2.0 * (row_sum.asDiagonal() * px->value - g * py->value);
      px->AccumulateGrad(gx);
    }
    if (py->requires_grad) {
      Matrix gy = 2.0 * (col_sum.asDiagonal() * py->value - g.transpose() * px->value);
      py->AccumulateGrad(gy);
    }
  });
}

}  // namespace edlab::ag
