// src/style-encoder.cc

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

#include "edlab/style-encoder.h"

#include <cmath>

namespace edlab {

void StyleBundle::Validate() const {
  const Index d = utterance_emb.size();
  if (speaker_emb.size() != d || frame_emb.cols() != d)
    throw ShapeError("style bundle embeddings disagree on width");
  if (!utterance_emb.allFinite() || !frame_emb.allFinite() || !speaker_emb.allFinite())
    throw NumericError("style bundle has non-finite entries");
}

AttentionParams AttentionParams::Init(int width, int n_heads, Rng &rng) {
  AttentionParams p;
  p.width = width;
  p.n_heads = n_heads;
  p.Validate();
  p.wq = ag::Param(UniformInit(width, width, width, rng));
  p.wk = ag::Param(UniformInit(width, width, width, rng));
  p.wv = ag::Param(UniformInit(width, width, width, rng));
  p.wo = ag::Param(UniformInit(width, width, width, rng));
  return p;
}

void AttentionParams::Validate() const {
  if (n_heads < 1 || width < 1 || width % n_heads != 0)
    throw ShapeError("attention width " + std::to_string(width) +
                     " is not divisible by n_heads " + std::to_string(n_heads));
}

std::vector<NamedParam> AttentionParams::Parameters(const std::string &prefix) const {
  return {{prefix + "wq", wq}, {prefix + "wk", wk}, {prefix + "wv", wv}, {prefix + "wo", wo}};
}

RowVector PositionEncoding(double position, int width) {
  RowVector pe(width);
  for (int i = 0; i < width; ++i) {
    const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / width);
    pe(i) = (i % 2 == 0) ? std::sin(position * freq) : std::cos(position * freq);
  }
  return pe;
}

namespace {

ag::Var AddPositions(const ag::Var &x, const std::vector<double> &pos, int width) {
  if (static_cast<Index>(pos.size()) != x.rows())
    throw ShapeError("attention positions do not match sequence length");
  Matrix pe(x.rows(), width);
  for (Index i = 0; i < x.rows(); ++i) pe.row(i) = PositionEncoding(pos[i], width);
  return ag::Add(x, ag::Constant(std::move(pe)));
}

}  // namespace

AttentionOutput CrossAttention(const ag::Var &content, const ag::Var &style_frames,
                               const AttentionParams &params,
                               const AttentionPositions *positions) {
  params.Validate();
  if (style_frames.rows() < 1) throw ShapeError("cross attention needs at least one style frame");
  if (content.cols() != params.width || style_frames.cols() != params.width)
    throw ShapeError("cross attention: input width differs from attention width " +
                     std::to_string(params.width));
  ag::Var q_in = content, k_in = style_frames;
  if (params.positional_encoding && positions != nullptr) {
    q_in = AddPositions(content, positions->query, params.width);
    k_in = AddPositions(style_frames, positions->key, params.width);
  }
  ag::Var q = ag::MatMul(q_in, params.wq);
  ag::Var k = ag::MatMul(k_in, params.wk);
  ag::Var v = ag::MatMul(style_frames, params.wv);

  const int head_dim = params.width / params.n_heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  AttentionOutput out;
  std::vector<ag::Var> heads;
  for (int h = 0; h < params.n_heads; ++h) {
    ag::Var qh = ag::SliceCols(q, h * head_dim, head_dim);
    ag::Var kh = ag::SliceCols(k, h * head_dim, head_dim);
    ag::Var vh = ag::SliceCols(v, h * head_dim, head_dim);
    ag::Var weights = ag::RowSoftmax(ag::Scale(ag::MatMul(qh, ag::Transpose(kh)), inv_scale));
    out.weights.push_back(weights.value());
    heads.push_back(ag::MatMul(weights, vh));
  }
  out.output = ag::MatMul(ag::ConcatCols(heads), params.wo);
  return out;
}

Matrix CrossAttentionAlign(const ContentSequence &content, const Matrix &style_frames,
                           const AttentionParams &params, const AttentionPositions *positions) {
  return CrossAttention(ag::Constant(content.z_c), ag::Constant(style_frames), params, positions)
      .output.value();
}

ag::Var CombineMultiScale(const ag::Var &aligned, const ag::Var &utterance_emb,
                          const ag::Var &speaker_emb) {
  return ag::AddRow(ag::AddRow(aligned, utterance_emb), speaker_emb);
}

Matrix CombineMultiScale(const Matrix &aligned, const StyleBundle &bundle) {
  bundle.Validate();
  if (aligned.cols() != bundle.utterance_emb.size())
    throw ShapeError("aligned width differs from style embedding width");
  Matrix out = aligned;
  out.rowwise() += bundle.utterance_emb + bundle.speaker_emb;
  return out;
}

}  // namespace edlab
