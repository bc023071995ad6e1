// tests/test-util.h

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

// Oracles and helpers shared by the unit tests. Everything here is written
// independently of the library code it checks.

#ifndef EDLAB_TESTS_TEST_UTIL_H_
#define EDLAB_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "edlab/diffusion.h"
#include "edlab/types.h"

namespace edlab::testing {

// Composite Simpson rule, n even.
inline double Simpson(const std::function<double(double)> &f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Time at which lambda(t) equals `variance`, by bisection on the
// quadrature-free closed form 1 - exp(-int beta).
inline double TimeForVariance(const NoiseSchedule &s, double variance) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double cum = s.beta0 * mid + 0.5 * (s.beta1 - s.beta0) * mid * mid;
    (1.0 - std::exp(-cum) < variance ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Multi-bandwidth Gaussian kernel, spelled out.
inline double NaiveKernel(const RowVector &x, const RowVector &y,
                          const std::vector<double> &sigmas) {
  double d2 = 0.0;
  for (Index k = 0; k < x.size(); ++k) d2 += (x(k) - y(k)) * (x(k) - y(k));
  double acc = 0.0;
  for (double s : sigmas) acc += std::exp(-d2 / (2.0 * s * s));
  return acc / static_cast<double>(sigmas.size());
}

// Weighted discrepancy sum_ij a_i a_j k(s_i,s_j) + b b k(t,t) - 2 a b k(s,t)
// over explicit pairs.
inline double NaiveWeightedMmd(const Matrix &s, const Matrix &t, const std::vector<double> &a,
                               const std::vector<double> &b, const std::vector<double> &sigmas) {
  double out = 0.0;
  for (Index i = 0; i < s.rows(); ++i)
    for (Index j = 0; j < s.rows(); ++j) out += a[i] * a[j] * NaiveKernel(s.row(i), s.row(j), sigmas);
  for (Index i = 0; i < t.rows(); ++i)
    for (Index j = 0; j < t.rows(); ++j) out += b[i] * b[j] * NaiveKernel(t.row(i), t.row(j), sigmas);
  for (Index i = 0; i < s.rows(); ++i)
    for (Index j = 0; j < t.rows(); ++j)
      out -= 2.0 * a[i] * b[j] * NaiveKernel(s.row(i), t.row(j), sigmas);
  return out;
}

inline double NaiveMmd(const Matrix &s, const Matrix &t, const std::vector<double> &sigmas) {
  return NaiveWeightedMmd(s, t, std::vector<double>(s.rows(), 1.0 / s.rows()),
                          std::vector<double>(t.rows(), 1.0 / t.rows()), sigmas);
}

inline std::vector<Index> RandomPermutation(Index n, Rng &rng) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), Index{0});
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

inline Matrix PermuteRows(const Matrix &m, const std::vector<Index> &p) {
  Matrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(p[static_cast<std::size_t>(i)]);
  return out;
}

// Fresh scratch directory under the system temp dir.
inline std::string ScratchDir(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / ("edlab-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace edlab::testing

#endif  // EDLAB_TESTS_TEST_UTIL_H_
