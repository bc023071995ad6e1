// include/edlab/toy-models.h

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

#ifndef EDLAB_TOY_MODELS_H_
#define EDLAB_TOY_MODELS_H_

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "edlab/autograd.h"
#include "edlab/diffusion.h"
#include "edlab/parameters.h"
#include "edlab/types.h"

namespace edlab {

// Utterance-level emotion encoder: per-frame linear + tanh, mean pooling,
// then a class head and an embedding head.
class ToySER {
 public:
  struct Config {
    int n_mel = 16;
    int hidden = 32;
    int n_classes = 4;
    int emb_dim = 32;
  };
  struct Output {
    ag::Var logits;     // groups x C
    ag::Var embedding;  // groups x emb_dim
  };

  ToySER() = default;
  ToySER(const Config &cfg, Rng &rng);

  // One output row per utterance.
  Output Forward(const ag::Var &mel) const;
  // One output row per [start, start + len) window of frames.
  Output ForwardPooled(const ag::Var &mel, std::vector<std::pair<Index, Index>> groups) const;

  const Config &config() const { return cfg_; }
  std::vector<NamedParam> Parameters() const;

 private:
  Config cfg_;
  ag::Var w_in_, b_in_, w_cls_, b_cls_, w_emb_, b_emb_;
};

// Frame-level emotion diarizer: stacked 1-D convolutions (stride 1,
// edge-replicated padding, tanh), a bottleneck and a per-frame classifier.
class ToySED {
 public:
  struct Config {
    int n_mel = 16;
    int conv_channels = 32;
    int n_conv_layers = 2;
    int kernel_size = 3;
    int bottleneck_dim = 32;
    int n_classes = 4;
  };
  struct Output {
    ag::Var frame_logits;         // n_frames x C
    ag::Var frame_style;          // n_frames x bottleneck_dim
    std::vector<ag::Var> layers;  // L conv outputs then the bottleneck
  };

  ToySED() = default;
  ToySED(const Config &cfg, Rng &rng);

  Output Forward(const ag::Var &mel) const;

  const Config &config() const { return cfg_; }
  std::vector<NamedParam> Parameters() const;

 private:
  Config cfg_;
  std::vector<std::vector<ag::Var>> conv_w_;  // [layer][tap], in x out
  std::vector<ag::Var> conv_b_;
  ag::Var w_bottleneck_, b_bottleneck_, w_head_, b_head_;
};

// Per-frame residual score network s(x_t, mu, t, Z_s). The raw head output is
// divided by sqrt(lambda(t)) so it lives on the scale of the true score.
class ToyScoreNet {
 public:
  struct Config {
    int n_mel = 16;
    int cond_dim = 32;
    int time_dim = 16;
    int hidden = 64;
    bool zero_head = false;
  };

  ToyScoreNet() = default;
  ToyScoreNet(const Config &cfg, const NoiseSchedule &schedule, Rng &rng);

  // mu: n_frames x n_mel; zs: n_frames x cond_dim (already at frame rate).
  ag::Var Forward(const ag::Var &xt, const ag::Var &mu, double t, const ag::Var &zs) const;
  // Plain evaluation; throws NumericError on NaN inputs.
  Matrix Evaluate(const Matrix &xt, const Matrix &mu, double t, const Matrix &zs) const;

  const Config &config() const { return cfg_; }
  const NoiseSchedule &schedule() const { return schedule_; }
  std::vector<NamedParam> Parameters() const;

 private:
  Config cfg_;
  NoiseSchedule schedule_;
  ag::Var w_in_, b_in_, w_res_, b_res_, w_out_, b_out_;
};

// Sinusoidal features of t at geometrically spaced frequencies.
RowVector TimeEmbedding(double t, int dim);

// Mean over rows of -sum_c target[r][c] * log_softmax(logits)[r][c].
ag::Var SoftCrossEntropy(const ag::Var &logits, const Matrix &targets);
Matrix Softmax(const Matrix &logits);
std::vector<int> ArgmaxRows(const Matrix &m);

struct GradCheckOptions {
  double step = 1e-5;
  double fraction = 0.1;
  // Denominator floor, so entries with vanishing gradients compare absolutely.
  double abs_floor = 1e-6;
  std::uint64_t seed = 7;
};

// Max relative error between backprop and central differences over a random
// subsample of parameter entries. `loss_fn` rebuilds the graph from the
// current parameter values and returns a 1x1 Var.
double GradCheck(const std::vector<NamedParam> &params, const std::function<ag::Var()> &loss_fn,
                 const GradCheckOptions &opts = {});

// JSON checkpoint: format_version, model kind, config, row-major arrays.
inline constexpr int kCheckpointFormatVersion = 1;
void SaveCheckpoint(const std::string &path, const std::string &kind,
                    const std::string &config_json, const std::vector<NamedParam> &params);
// Copies stored arrays into `params`; throws MissingInputError if the file is
// absent and ShapeError on a name, kind or shape mismatch.
void LoadCheckpoint(const std::string &path, const std::string &kind,
                    const std::vector<NamedParam> &params);
std::string ReadCheckpointConfig(const std::string &path);

// Whole-model helpers: the stored config rebuilds the architecture.
void SaveModel(const std::string &path, const ToySER &m);
void SaveModel(const std::string &path, const ToySED &m);
ToySER LoadSer(const std::string &path);
ToySED LoadSed(const std::string &path);

std::string ToJson(const ToySER::Config &c);
std::string ToJson(const ToySED::Config &c);
std::string ToJson(const ToyScoreNet::Config &c);
ToySER::Config SerConfigFromJson(const std::string &s);
ToySED::Config SedConfigFromJson(const std::string &s);
ToyScoreNet::Config ScoreNetConfigFromJson(const std::string &s);

}  // namespace edlab

#endif  // EDLAB_TOY_MODELS_H_
