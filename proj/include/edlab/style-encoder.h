// include/edlab/style-encoder.h

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

#ifndef EDLAB_STYLE_ENCODER_H_
#define EDLAB_STYLE_ENCODER_H_

#include <string>
#include <vector>

#include "edlab/autograd.h"
#include "edlab/parameters.h"
#include "edlab/types.h"

namespace edlab {

// Utterance-level, frame-level and speaker conditioning of one reference.
struct StyleBundle {
  RowVector utterance_emb;
  Matrix frame_emb;  // n_frames x d_s
  RowVector speaker_emb;

  void Validate() const;
};

struct ContentSequence {
  Matrix z_c;  // n_phonemes x d_s
};

// Multi-head projections, all d_s x d_s; head h owns columns
// [h * d_s / n_heads, (h + 1) * d_s / n_heads) of the query/key/value maps.
struct AttentionParams {
  int n_heads = 2;
  int width = 32;
  bool positional_encoding = false;
  ag::Var wq, wk, wv, wo;

  static AttentionParams Init(int width, int n_heads, Rng &rng);
  void Validate() const;
  std::vector<NamedParam> Parameters(const std::string &prefix = "attention.") const;
};

// Positions (in frames) used only when positional_encoding is on.
struct AttentionPositions {
  std::vector<double> query;
  std::vector<double> key;
};

struct AttentionOutput {
  ag::Var output;                // n_queries x d_s
  std::vector<Matrix> weights;   // per head, n_queries x n_keys
};

// Scaled dot-product attention with query = content and key = value = style
// frames; logits are divided by sqrt(d_s / n_heads).
AttentionOutput CrossAttention(const ag::Var &content, const ag::Var &style_frames,
                               const AttentionParams &params,
                               const AttentionPositions *positions = nullptr);
Matrix CrossAttentionAlign(const ContentSequence &content, const Matrix &style_frames,
                           const AttentionParams &params,
                           const AttentionPositions *positions = nullptr);

// Z_s[i] = aligned[i] + utterance_emb + speaker_emb.
ag::Var CombineMultiScale(const ag::Var &aligned, const ag::Var &utterance_emb,
                          const ag::Var &speaker_emb);
Matrix CombineMultiScale(const Matrix &aligned, const StyleBundle &bundle);

// Sinusoidal encoding of one position into `width` channels.
RowVector PositionEncoding(double position, int width);

}  // namespace edlab

#endif  // EDLAB_STYLE_ENCODER_H_
