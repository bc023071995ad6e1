// include/edlab/experiments.h

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

#ifndef EDLAB_EXPERIMENTS_H_
#define EDLAB_EXPERIMENTS_H_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "edlab/experiment-config.h"
#include "edlab/training.h"

namespace edlab {

// Source utterances, target utterances used for adaptation and TTS training
// (labels unused), and held-out target utterances for evaluation.
struct ExperimentData {
  Corpus source;
  Corpus target_train;
  Corpus target_eval;
};
ExperimentData PrepareData(const ExperimentConfig &cfg);

struct TtsVariant {
  std::string name;
  bool use_sed_conditioning = true;
  bool use_frame_label_loss = true;
  bool use_cross_domain_sed = true;
};
// full, w/o SED, w/o frame label, w/o cross domain.
const std::vector<TtsVariant> &TtsAblationVariants();
TtsTrainConfig ApplyVariant(TtsTrainConfig cfg, const TtsVariant &v);

// Everything one TTS run needs: frozen encoders plus soft-labeled training data.
struct TtsRunResult {
  TtsModel model;
  TtsTrainResult train;
  EraSummary era;
};
// Trains a TTS model against `conditioning_sed` (also the soft-label source)
// and scores syntheses with `evaluator`.
TtsRunResult RunTts(const ExperimentConfig &cfg, const ExperimentData &data, const ToySER &ser,
                    const ToySED &conditioning_sed, const ToySED &evaluator);

struct AblationReport {
  std::vector<std::uint64_t> sed_seeds;
  std::vector<std::uint64_t> tts_seeds;
  // mode name -> target EDER per seed, in sed_seeds order.
  std::map<std::string, std::vector<double>> eder;
  // variant name -> mean ERA per seed, in tts_seeds order.
  std::map<std::string, std::vector<double>> era;
  int syntheses_per_seed = 0;

  // Seeds on which mlmmd <= min(mmmd, lmmd) <= mmd <= none.
  int LadderOrderedSeeds() const;
  std::string EderCsv() const;
  std::string EraCsv() const;
  std::string TidyCsv() const;
  std::string ToJson() const;
};

using ProgressFn = std::function<void(const std::string &)>;

// Per-seed encoder checkpoints live in <dir>/seed_<s>/{ser,sed_<mode>}.json.
struct AblationOptions {
  bool with_tts = true;
  std::string load_dir;  // reuse trained encoders instead of training them
  std::string save_dir;  // write trained encoders here
};
std::string SeedCheckpointDir(const std::string &root, std::uint64_t seed);
// Paths the suite would read from `dir`, restricted to those that do not exist.
std::vector<std::string> MissingAblationCheckpoints(const ExperimentConfig &cfg,
                                                    const std::string &dir);

// EDER ladder over `sed_seeds` training seeds and the TTS ERA
// ablations over the first `tts_seeds` of them. Corpus stays fixed.
// Throws MissingInputError listing every absent checkpoint when loading.
AblationReport RunAblationSuite(const ExperimentConfig &cfg, const AblationOptions &opts = {},
                                const ProgressFn &progress = {});
// Only the EDER ladder.
AblationReport RunSedLadder(const ExperimentConfig &cfg, const ProgressFn &progress = {});

double MeanOf(const std::vector<double> &xs);
double StdOf(const std::vector<double> &xs);

}  // namespace edlab

#endif  // EDLAB_EXPERIMENTS_H_
