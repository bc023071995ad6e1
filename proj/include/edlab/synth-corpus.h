// include/edlab/synth-corpus.h

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

#ifndef EDLAB_SYNTH_CORPUS_H_
#define EDLAB_SYNTH_CORPUS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edlab/diarization.h"
#include "edlab/mmd.h"
#include "edlab/types.h"

namespace edlab {

class ToySED;

enum class Domain { kSource, kTarget };
const char *DomainName(Domain d);
Domain ParseDomain(const std::string &name);

// Per-channel affine distortion applied to target-domain utterances:
// mel' = gain * mel + bias + Normal(0, noise_std).
struct DomainShift {
  double gain_min = 0.6;
  double gain_max = 1.4;
  double bias_max = 0.3;
  double noise_std = 0.1;

  static DomainShift Identity() { return {1.0, 1.0, 0.0, 0.0}; }
};

struct CorpusSpec {
  int n_utterances = 300;
  int n_mel_channels = 16;
  double frame_hop = 0.01;
  int min_frames = 40;
  int max_frames = 80;
  int n_classes = 4;  // class 0 is neutral
  int n_speakers = 4;
  int n_phonemes = 24;
  int max_segments = 3;
  double target_fraction = 0.5;  // trailing utterances belong to the target domain
  double template_scale = 0.2;
  double modulation_depth = 0.4;
  double phoneme_scale = 0.1;
  double speaker_scale = 0.05;
  double noise_std = 0.1;
  DomainShift domain_shift;
  // Relative emotion frequencies in the target domain (label shift); empty
  // means the same uniform draw as the source.
  std::vector<double> target_class_weights = {2.0, 4.0, 1.0, 1.0};
  std::uint64_t seed = 1;

  void Validate() const;
};

struct SyntheticUtterance {
  int id = 0;
  Matrix mel;  // n_frames x n_mel
  FrameLabelSequence frame_labels;
  SegmentList segments;
  std::vector<int> phoneme_ids;
  std::vector<int> phoneme_frames;  // frames per phoneme; sums to n_frames
  int speaker_id = 0;
  Domain domain = Domain::kSource;
  std::optional<SoftLabelMatrix> soft_labels;  // filled by SoftLabelCorpus

  Index num_frames() const { return mel.rows(); }
  // Index of the phoneme covering each frame.
  std::vector<Index> FrameToPhoneme() const;
  // Center frame of each phoneme.
  std::vector<double> PhonemeCenters() const;
};

using Corpus = std::vector<SyntheticUtterance>;

// Class- and seed-dependent pieces of the generator, exposed for tests.
struct CorpusTemplates {
  Matrix class_means;        // C x n_mel
  std::vector<double> class_rates;  // modulation frequency per class, Hz
  Matrix phoneme_means;      // n_phonemes x n_mel
  Matrix speaker_offsets;    // n_speakers x n_mel
  RowVector shift_gain;
  RowVector shift_bias;

  // Clean emotion template of class c at time `seconds`.
  RowVector ClassFrame(int c, double seconds, double modulation_depth) const;
};
CorpusTemplates MakeTemplates(const CorpusSpec &spec);

Corpus GenerateCorpus(const CorpusSpec &spec);
Corpus FilterDomain(const Corpus &corpus, Domain domain);

// Stores per-frame SED posteriors on every utterance.
void SoftLabelCorpus(const ToySED &sed, Corpus &corpus);

// Directory layout: manifest.json, mel_XXXXX.bin, seg_XXXXX.csv.
void SaveCorpus(const std::string &dir, const CorpusSpec &spec, const Corpus &corpus);
Corpus LoadCorpus(const std::string &dir, CorpusSpec *spec = nullptr);

std::string CorpusSpecToJson(const CorpusSpec &spec);

}  // namespace edlab

#endif  // EDLAB_SYNTH_CORPUS_H_
