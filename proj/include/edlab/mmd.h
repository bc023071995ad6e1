// include/edlab/mmd.h

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

#ifndef EDLAB_MMD_H_
#define EDLAB_MMD_H_

#include <span>
#include <vector>

#include "edlab/autograd.h"
#include "edlab/types.h"

namespace edlab {

enum class BandwidthMode { kFixed, kMedianHeuristic };

// Multi-kernel Gaussian: k(x, y) = mean_k exp(-||x - y||^2 / (2 sigma_k^2)).
// In median mode each sigma_k = multiplier_k * (median pairwise distance of
// the joint batch); `bandwidths` then holds the multipliers.
struct KernelConfig {
  std::vector<double> bandwidths = {0.5, 1.0, 2.0};
  BandwidthMode mode = BandwidthMode::kMedianHeuristic;

  void Validate() const;
};

// Per-row class probabilities (n_samples x C).
class SoftLabelMatrix {
 public:
  SoftLabelMatrix() = default;
  // Throws DomainError if an entry is negative or a row does not sum to 1.
  explicit SoftLabelMatrix(Matrix weights);
  static SoftLabelMatrix OneHot(const std::vector<int> &labels, int num_classes);

  const Matrix &weights() const { return weights_; }
  Index num_samples() const { return weights_.rows(); }
  Index num_classes() const { return weights_.cols(); }

 private:
  Matrix weights_;
};

struct LayerActivations {
  std::vector<Matrix> layers;  // layer l is n_samples x d_l

  Index num_samples() const { return layers.empty() ? 0 : layers.front().rows(); }
  void Validate() const;
};

double GaussianKernel(const Vector &x, const Vector &y, const KernelConfig &cfg);

// Concrete sigmas for a batch; fixed mode returns cfg.bandwidths unchanged.
std::vector<double> ResolveBandwidths(const KernelConfig &cfg, const Matrix &s, const Matrix &t);
double MedianPairwiseDistance(const Matrix &points);

// Biased (V-statistic) squared MMD between the rows of s and t.
double Mmd2(const Matrix &s, const Matrix &t, const KernelConfig &cfg);
// Class-conditional MMD with per-domain column-normalized soft weights,
// averaged over classes that carry at least kMinClassMass in both domains.
double Lmmd2(const Matrix &s, const Matrix &t, const SoftLabelMatrix &ws,
             const SoftLabelMatrix &wt, const KernelConfig &cfg);
// Mean of Lmmd2 over layers, the same weights on every layer.
double Mlmmd2(const LayerActivations &s, const LayerActivations &t, const SoftLabelMatrix &ws,
              const SoftLabelMatrix &wt, const KernelConfig &cfg);
// Mean of Mmd2 over layers.
double MultiLayerMmd2(const LayerActivations &s, const LayerActivations &t,
                      const KernelConfig &cfg);

// ce + lambda * adaptation.
double SedTotalLoss(double ce_loss, double mlmmd_value, double lambda_weight);

inline constexpr double kMinClassMass = 1e-8;

// Differentiable counterparts. Bandwidths are resolved from the current
// values and treated as constants.
namespace ag {
Var KernelMatrix(const Var &x, const Var &y, std::span<const double> sigmas);
Var Mmd2(const Var &s, const Var &t, const KernelConfig &cfg);
Var Lmmd2(const Var &s, const Var &t, const SoftLabelMatrix &ws, const SoftLabelMatrix &wt,
          const KernelConfig &cfg);
Var Mlmmd2(std::span<const Var> s, std::span<const Var> t, const SoftLabelMatrix &ws,
           const SoftLabelMatrix &wt, const KernelConfig &cfg);
Var MultiLayerMmd2(std::span<const Var> s, std::span<const Var> t, const KernelConfig &cfg);
}  // namespace ag

}  // namespace edlab

#endif  // EDLAB_MMD_H_
