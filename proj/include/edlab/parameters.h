// include/edlab/parameters.h

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

#ifndef EDLAB_PARAMETERS_H_
#define EDLAB_PARAMETERS_H_

#include <string>
#include <unordered_map>
#include <vector>

#include "edlab/autograd.h"
#include "edlab/types.h"

namespace edlab {

// A trainable leaf with a stable name for checkpoints. Copies share storage.
struct NamedParam {
  std::string name;
  ag::Var var;
};

// uniform(-a, a) with a = 1 / sqrt(fan_in).
Matrix UniformInit(Index rows, Index cols, Index fan_in, Rng &rng);

std::size_t CountParameters(const std::vector<NamedParam> &params);
void ZeroGrads(const std::vector<NamedParam> &params);
// Frozen parameters stop receiving gradients; downstream graphs still pass
// gradients through them to other inputs.
void SetTrainable(const std::vector<NamedParam> &params, bool trainable);

// Stochastic gradient descent with heavy-ball momentum:
//   v <- momentum * v + g;  p <- p - lr * v
// Gradients are rescaled to `max_grad_norm` (global L2) when it is positive.
class SgdMomentum {
 public:
  SgdMomentum(double learning_rate, double momentum = 0.9, double max_grad_norm = 0.0)
      : lr_(learning_rate), momentum_(momentum), max_grad_norm_(max_grad_norm) {}

  void Step(const std::vector<NamedParam> &params);

 private:
  double lr_;
  double momentum_;
  double max_grad_norm_;
  std::unordered_map<const ag::Node *, Matrix> velocity_;
};

}  // namespace edlab

#endif  // EDLAB_PARAMETERS_H_
