// include/edlab/experiment-config.h

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

#ifndef EDLAB_EXPERIMENT_CONFIG_H_
#define EDLAB_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>

#include "edlab/diffusion.h"
#include "edlab/mmd.h"
#include "edlab/synth-corpus.h"
#include "edlab/training.h"

namespace edlab {

struct PathsConfig {
  std::string workdir = "runs";
  std::string checkpoint_dir = "checkpoints";
};

// Held-out split and seed counts for evaluation and ablation runs.
struct EvaluationConfig {
  int n_eval_target = 50;  // trailing target utterances held out from training
  int sed_seeds = 5;
  int tts_seeds = 3;
};

struct ExperimentConfig {
  CorpusSpec corpus;
  NoiseSchedule schedule;
  SamplerConfig sampler;
  KernelConfig kernel;
  SedTrainConfig sed_train;
  TtsTrainConfig tts_train;
  PathsConfig paths;
  EvaluationConfig evaluation;
  std::uint64_t seed = 1;

  void Validate() const;
};

ExperimentConfig DefaultExperimentConfig();

// Parses a JSON document; absent keys take defaults, unknown keys and bad
// values throw ConfigError naming the field path (e.g. "sed_train.epochs").
// Training seeds follow the top-level seed unless set explicitly.
ExperimentConfig ParseExperimentConfig(const std::string &json_text);
// Every field, defaults materialized.
std::string ExperimentConfigToJson(const ExperimentConfig &cfg);

// Sets the master seed and both training seeds.
void OverrideSeed(ExperimentConfig &cfg, std::uint64_t seed);

}  // namespace edlab

#endif  // EDLAB_EXPERIMENT_CONFIG_H_
