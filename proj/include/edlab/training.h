// include/edlab/training.h

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

#ifndef EDLAB_TRAINING_H_
#define EDLAB_TRAINING_H_

#include <cstdint>
#include <string>
#include <vector>

#include "edlab/diarization.h"
#include "edlab/diffusion.h"
#include "edlab/mmd.h"
#include "edlab/style-encoder.h"
#include "edlab/synth-corpus.h"
#include "edlab/toy-models.h"

namespace edlab {

enum class AdaptationMode { kNone, kMmd, kMmmd, kLmmd, kMlmmd };
const char *AdaptationModeName(AdaptationMode m);
AdaptationMode ParseAdaptationMode(const std::string &name);
inline constexpr AdaptationMode kAllAdaptationModes[] = {
    AdaptationMode::kNone, AdaptationMode::kMmd, AdaptationMode::kMmmd, AdaptationMode::kLmmd,
    AdaptationMode::kMlmmd};

struct SedTrainConfig {
  int epochs = 20;
  int batch_size = 8;  // utterances per domain per step
  int steps_per_epoch = 12;
  double lambda_weight = 0.5;
  AdaptationMode adaptation_mode = AdaptationMode::kMlmmd;
  double learning_rate = 3e-2;
  double momentum = 0.9;
  double max_grad_norm = 5.0;
  int pool_window = 8;  // frames averaged into one MMD sample
  int ser_epochs = 30;
  int ser_hidden = 32;
  int conv_channels = 32;
  int n_conv_layers = 2;
  int kernel_size = 3;
  int style_dim = 32;  // SED bottleneck and SER embedding width
  std::uint64_t seed = 1;

  void Validate() const;
};

struct TtsTrainConfig {
  int steps = 4000;
  int batch_size = 4;
  double ce_weight = 1.0;
  bool use_sed_conditioning = true;
  bool use_frame_label_loss = true;
  bool use_cross_domain_sed = true;
  double learning_rate = 3e-3;
  double momentum = 0.9;
  double max_grad_norm = 5.0;
  double t_min = kDefaultMinTrainingTime;
  // The frame-label loss is applied only to draws with t <= ce_max_t, where
  // the one-step estimate of x_0 is still informative.
  double ce_max_t = 0.4;
  bool positional_encoding = true;
  int n_heads = 2;
  int hidden = 64;
  int time_dim = 16;
  int n_syntheses = 50;  // evaluation references per seed
  std::uint64_t seed = 1;

  void Validate() const;
};

// Per-epoch record of cross-domain SED training.
struct SedEpochLog {
  int epoch = 0;
  double ce = 0.0;
  double adaptation = 0.0;
  double total = 0.0;
  double target_eder = 0.0;
  double source_accuracy = 0.0;
};

struct SedTrainResult {
  ToySED model;
  std::vector<SedEpochLog> log;
  std::vector<double> step_losses;
};

// Trains the utterance-level emotion encoder on single-emotion segments of
// the labeled source corpus.
ToySER TrainSer(const SedTrainConfig &cfg, const Corpus &source, int n_classes);

// Splits each utterance into pool_window-frame windows (a short tail joins
// the previous window).
std::vector<std::pair<Index, Index>> PoolWindows(Index n_frames, int window);

// CE on source frame labels plus lambda times the configured adaptation
// term between source and target pooled layer activations, with soft class
// weights from the frozen SER. Target labels are never read.
SedTrainResult TrainSedCrossDomain(const SedTrainConfig &cfg, const KernelConfig &kernel,
                                   const ToySER &ser, const Corpus &source, const Corpus &target,
                                   const Corpus &eval_target);

// Duration-weighted EDER of SED argmax decisions over a corpus.
EderBreakdown EvaluateEder(const ToySED &sed, const Corpus &corpus);
double FrameAccuracy(const ToySED &sed, const Corpus &corpus);
FrameLabelSequence Diarize(const ToySED &sed, const Matrix &mel, double frame_hop);

// Trainable TTS-side modules plus the frozen encoders they read.
struct TtsModel {
  ToyScoreNet score_net;
  AttentionParams attention;
  ag::Var mu_table;       // n_phonemes x n_mel
  ag::Var content_table;  // n_phonemes x d_s
  ag::Var speaker_table;  // n_speakers x d_s
  bool use_sed_conditioning = true;

  static TtsModel Init(const TtsTrainConfig &cfg, const CorpusSpec &corpus, int style_dim,
                       const NoiseSchedule &schedule, Rng &rng);
  std::vector<NamedParam> Parameters() const;
};

struct FrozenEncoders {
  const ToySER *ser = nullptr;
  const ToySED *sed = nullptr;
};

// Frame-rate conditioning of one reference utterance.
struct FrameConditioning {
  ag::Var mu;  // n_frames x n_mel
  ag::Var zs;  // n_frames x d_s
};
FrameConditioning BuildConditioning(const TtsModel &model, const FrozenEncoders &enc,
                                    const SyntheticUtterance &reference);

struct TtsLossBreakdown {
  double diff = 0.0;
  double ce = 0.0;
  double total = 0.0;
  int ce_samples = 0;  // draws that contributed to the frame-label term
};

// One optimizer-free step: builds the batch loss and backpropagates into the
// model parameters. The diffusion term is lambda(t) times the per-element
// score-matching error; the frame-label term is the soft-label CE of the
// frozen SED on x0_hat = (x_t + lambda * score) / mean_coef.
TtsLossBreakdown TtsTrainingStep(const TtsModel &model, const FrozenEncoders &enc,
                                 const std::vector<const SyntheticUtterance *> &batch,
                                 const NoiseSchedule &schedule, const TtsTrainConfig &cfg,
                                 Rng &rng);

struct TtsTrainResult {
  std::vector<TtsLossBreakdown> steps;
};
// Freezes the encoders in `enc` before optimizing the TTS parameters.
TtsTrainResult TrainTts(TtsModel &model, const FrozenEncoders &enc, const Corpus &train,
                        const NoiseSchedule &schedule, const TtsTrainConfig &cfg);

// Reverse-samples a mel with the reference's length and alignment.
Matrix Synthesize(const TtsModel &model, const FrozenEncoders &enc,
                  const SyntheticUtterance &reference, const NoiseSchedule &schedule,
                  const SamplerConfig &sampler, Rng &rng);

// Mean ERA over references: evaluator SED labels on the synthesized mel vs
// the reference ground-truth frame labels.
struct EraSummary {
  double mean = 0.0;
  std::vector<double> per_utterance;
};
EraSummary EvaluateEra(const TtsModel &model, const FrozenEncoders &enc, const ToySED &evaluator,
                       const Corpus &references, const NoiseSchedule &schedule,
                       const SamplerConfig &sampler, std::uint64_t seed);

// Moving average over `window` trailing entries.
std::vector<double> Smooth(const std::vector<double> &xs, int window);

}  // namespace edlab

#endif  // EDLAB_TRAINING_H_
