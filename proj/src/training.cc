// src/training.cc

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

#include "edlab/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace edlab {

const char *AdaptationModeName(AdaptationMode m) {
  switch (m) {
    case AdaptationMode::kNone: return "none";
    case AdaptationMode::kMmd: return "mmd";
    case AdaptationMode::kMmmd: return "mmmd";
    case AdaptationMode::kLmmd: return "lmmd";
    case AdaptationMode::kMlmmd: return "mlmmd";
  }
  return "?";
}

AdaptationMode ParseAdaptationMode(const std::string &name) {
  for (AdaptationMode m : kAllAdaptationModes)
    if (name == AdaptationModeName(m)) return m;
  throw DomainError("unknown adaptation mode '" + name + "'");
}

void SedTrainConfig::Validate() const {
  if (epochs < 1) throw ConfigError("sed_train.epochs", "must be >= 1");
  if (batch_size < 1) throw ConfigError("sed_train.batch_size", "must be >= 1");
  if (steps_per_epoch < 1) throw ConfigError("sed_train.steps_per_epoch", "must be >= 1");
  if (lambda_weight < 0.0) throw ConfigError("sed_train.lambda_weight", "must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("sed_train.learning_rate", "must be positive");
  if (pool_window < 1) throw ConfigError("sed_train.pool_window", "must be >= 1");
  if (ser_epochs < 0) throw ConfigError("sed_train.ser_epochs", "must be >= 0");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw ConfigError("sed_train.kernel_size", "must be a positive odd number");
  if (n_conv_layers < 1) throw ConfigError("sed_train.n_conv_layers", "must be >= 1");
  if (style_dim < 1 || conv_channels < 1 || ser_hidden < 1)
    throw ConfigError("sed_train", "layer widths must be >= 1");
}

void TtsTrainConfig::Validate() const {
  if (steps < 1) throw ConfigError("tts_train.steps", "must be >= 1");
  if (batch_size < 1) throw ConfigError("tts_train.batch_size", "must be >= 1");
  if (ce_weight < 0.0) throw ConfigError("tts_train.ce_weight", "must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("tts_train.learning_rate", "must be positive");
  if (!(t_min >= 0.0 && t_min < 1.0)) throw ConfigError("tts_train.t_min", "must lie in [0, 1)");
  if (!(ce_max_t > 0.0 && ce_max_t <= 1.0))
    throw ConfigError("tts_train.ce_max_t", "must lie in (0, 1]");
  if (n_heads < 1) throw ConfigError("tts_train.n_heads", "must be >= 1");
  if (hidden < 1 || time_dim < 2) throw ConfigError("tts_train", "network widths too small");
  if (n_syntheses < 1) throw ConfigError("tts_train.n_syntheses", "must be >= 1");
}

std::vector<std::pair<Index, Index>> PoolWindows(Index n_frames, int window) {
  std::vector<std::pair<Index, Index>> out;
  for (Index start = 0; start < n_frames; start += window)
    out.emplace_back(start, std::min<Index>(window, n_frames - start));
  if (out.size() > 1 && out.back().second < window) {
    out[out.size() - 2].second += out.back().second;
    out.pop_back();
  }
  return out;
}

namespace {

Matrix OneHotRows(const std::vector<int> &labels, int n_classes) {
  Matrix m = Matrix::Zero(static_cast<Index>(labels.size()), n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) m(static_cast<Index>(i), labels[i]) = 1.0;
  return m;
}

// Cycles through a reshuffled permutation of [0, n).
class BatchSampler {
 public:
  BatchSampler(std::size_t n, Rng &rng) : rng_(rng), order_(n) { Reshuffle(); }

  std::vector<std::size_t> Next(int count) {
    std::vector<std::size_t> out;
    for (int i = 0; i < count; ++i) {
      if (at_ == order_.size()) Reshuffle();
      out.push_back(order_[at_++]);
    }
    return out;
  }

 private:
  void Reshuffle() {
    std::iota(order_.begin(), order_.end(), 0);
    std::shuffle(order_.begin(), order_.end(), rng_);
    at_ = 0;
  }
  Rng &rng_;
  std::vector<std::size_t> order_;
  std::size_t at_ = 0;
};

void CheckFinite(double v, const std::string &what) {
  if (!std::isfinite(v)) throw NumericError(what + " became non-finite");
}

}  // namespace

ToySER TrainSer(const SedTrainConfig &cfg, const Corpus &source, int n_classes) {
  cfg.Validate();
  if (source.empty()) throw DomainError("SER training needs source utterances");
  Rng rng(SubSeed(cfg.seed, 101));
  ToySER::Config sc;
  sc.n_mel = static_cast<int>(source.front().mel.cols());
  sc.hidden = cfg.ser_hidden;
  sc.n_classes = n_classes;
  sc.emb_dim = cfg.style_dim;
  ToySER ser(sc, rng);

  struct Sample {
    std::size_t utt;
    Index start, len;
    int label;
  };
  std::vector<Sample> samples;
  for (std::size_t u = 0; u < source.size(); ++u) {
    const double hop = source[u].frame_labels.frame_hop;
    for (const auto &s : source[u].segments.segments) {
      const Index start = std::llround(s.start / hop);
      const Index end = std::llround(s.end / hop);
      samples.push_back({u, start, end - start, s.label});
    }
  }
  const auto params = ser.Parameters();
  SgdMomentum opt(cfg.learning_rate, cfg.momentum, cfg.max_grad_norm);
  constexpr int kBatch = 16;
  BatchSampler sampler(samples.size(), rng);
  const int steps_per_epoch = static_cast<int>((samples.size() + kBatch - 1) / kBatch);
  for (int epoch = 0; epoch < cfg.ser_epochs; ++epoch) {
    for (int step = 0; step < steps_per_epoch; ++step) {
      std::vector<ag::Var> logits;
      std::vector<int> labels;
      for (std::size_t k : sampler.Next(kBatch)) {
        const Sample &s = samples[k];
        logits.push_back(
            ser.ForwardPooled(ag::Constant(source[s.utt].mel), {{s.start, s.len}}).logits);
        labels.push_back(s.label);
      }
      ag::Var loss = SoftCrossEntropy(ag::ConcatRows(logits), OneHotRows(labels, n_classes));
      CheckFinite(loss.scalar(), "SER training loss");
      ZeroGrads(params);
      ag::Backward(loss);
      opt.Step(params);
    }
  }
  return ser;
}

FrameLabelSequence Diarize(const ToySED &sed, const Matrix &mel, double frame_hop) {
  FrameLabelSequence f;
  f.frame_hop = frame_hop;
  f.labels = ArgmaxRows(sed.Forward(ag::Constant(mel)).frame_logits.value());
  return f;
}

EderBreakdown EvaluateEder(const ToySED &sed, const Corpus &corpus) {
  EderBreakdown total;
  for (const auto &u : corpus) {
    const FrameLabelSequence hyp = Diarize(sed, u.mel, u.frame_labels.frame_hop);
    const EderBreakdown b = ComputeEderBreakdown(u.segments, FramesToSegments(hyp));
    total.false_alarm += b.false_alarm;
    total.missed += b.missed;
    total.confusion += b.confusion;
    total.total_duration += b.total_duration;
  }
  return total;
}

double FrameAccuracy(const ToySED &sed, const Corpus &corpus) {
  std::size_t hits = 0, total = 0;
  for (const auto &u : corpus) {
    const auto pred = ArgmaxRows(sed.Forward(ag::Constant(u.mel)).frame_logits.value());
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == u.frame_labels.labels[i];
    total += pred.size();
  }
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

SedTrainResult TrainSedCrossDomain(const SedTrainConfig &cfg, const KernelConfig &kernel,
                                   const ToySER &ser, const Corpus &source, const Corpus &target,
                                   const Corpus &eval_target) {
  cfg.Validate();
  kernel.Validate();
  if (source.empty() || target.empty()) throw DomainError("SED training needs both domains");
  Rng rng(SubSeed(cfg.seed, 202));
  ToySED::Config sc;
  sc.n_mel = static_cast<int>(source.front().mel.cols());
  sc.conv_channels = cfg.conv_channels;
  sc.n_conv_layers = cfg.n_conv_layers;
  sc.kernel_size = cfg.kernel_size;
  sc.bottleneck_dim = cfg.style_dim;
  sc.n_classes = ser.config().n_classes;
  SedTrainResult result{ToySED(sc, rng), {}, {}};
  const ToySED &sed = result.model;
  const int n_classes = sc.n_classes;

  // Frozen SER posteriors per pooling window, computed once.
  auto window_weights = [&](const Corpus &corpus) {
    std::vector<Matrix> w;
    for (const auto &u : corpus) {
      const auto groups = PoolWindows(u.num_frames(), cfg.pool_window);
      w.push_back(Softmax(ser.ForwardPooled(ag::Constant(u.mel), groups).logits.value()));
    }
    return w;
  };
  const std::vector<Matrix> source_w = window_weights(source);
  const std::vector<Matrix> target_w = window_weights(target);

  const auto params = sed.Parameters();
  SgdMomentum opt(cfg.learning_rate, cfg.momentum, cfg.max_grad_norm);
  BatchSampler source_batches(source.size(), rng);
  BatchSampler target_batches(target.size(), rng);
  const bool multi_layer =
      cfg.adaptation_mode == AdaptationMode::kMmmd || cfg.adaptation_mode == AdaptationMode::kMlmmd;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    SedEpochLog log;
    log.epoch = epoch;
    for (int step = 0; step < cfg.steps_per_epoch; ++step) {
      const std::size_t n_layers = static_cast<std::size_t>(cfg.n_conv_layers) + 1;
      std::vector<std::vector<ag::Var>> src_layers(n_layers), tgt_layers(n_layers);
      std::vector<ag::Var> logits;
      std::vector<int> labels;
      std::vector<Matrix> ws_rows, wt_rows;

      for (std::size_t k : source_batches.Next(cfg.batch_size)) {
        const auto &u = source[k];
        const auto out = sed.Forward(ag::Constant(u.mel));
        logits.push_back(out.frame_logits);
        labels.insert(labels.end(), u.frame_labels.labels.begin(), u.frame_labels.labels.end());
        const auto groups = PoolWindows(u.num_frames(), cfg.pool_window);
        for (std::size_t l = 0; l < n_layers; ++l)
          src_layers[l].push_back(ag::SegmentMeanRows(out.layers[l], groups));
        ws_rows.push_back(source_w[k]);
      }
      for (std::size_t k : target_batches.Next(cfg.batch_size)) {
        const auto &u = target[k];
        const auto out = sed.Forward(ag::Constant(u.mel));
        const auto groups = PoolWindows(u.num_frames(), cfg.pool_window);
        for (std::size_t l = 0; l < n_layers; ++l)
          tgt_layers[l].push_back(ag::SegmentMeanRows(out.layers[l], groups));
        wt_rows.push_back(target_w[k]);
      }

      ag::Var ce = SoftCrossEntropy(ag::ConcatRows(logits), OneHotRows(labels, n_classes));
      ag::Var total = ce;
      double adapt_value = 0.0;
      if (cfg.adaptation_mode != AdaptationMode::kNone) {
        std::vector<ag::Var> s, t;
        const std::size_t first = multi_layer ? 0 : n_layers - 1;
        for (std::size_t l = first; l < n_layers; ++l) {
          s.push_back(ag::ConcatRows(src_layers[l]));
          t.push_back(ag::ConcatRows(tgt_layers[l]));
        }
        auto stack = [](const std::vector<Matrix> &rows) {
          Index n = 0;
          for (const auto &r : rows) n += r.rows();
          Matrix m(n, rows.front().cols());
          Index at = 0;
          for (const auto &r : rows) {
            m.middleRows(at, r.rows()) = r;
            at += r.rows();
          }
          return m;
        };
        ag::Var adapt;
        switch (cfg.adaptation_mode) {
          case AdaptationMode::kMmd:
          case AdaptationMode::kMmmd:
            adapt = ag::MultiLayerMmd2(s, t, kernel);
            break;
          case AdaptationMode::kLmmd:
          case AdaptationMode::kMlmmd:
            adapt = ag::Mlmmd2(s, t, SoftLabelMatrix(stack(ws_rows)),
                               SoftLabelMatrix(stack(wt_rows)), kernel);
            break;
          case AdaptationMode::kNone:
            break;
        }
        adapt_value = adapt.scalar();
        total = ag::Add(ce, ag::Scale(adapt, cfg.lambda_weight));
      }
      auto diverged = [&] {
        return NumericError("SED training diverged (mode=" +
                            std::string(AdaptationModeName(cfg.adaptation_mode)) +
                            " lambda=" + std::to_string(cfg.lambda_weight) +
                            " lr=" + std::to_string(cfg.learning_rate) +
                            " seed=" + std::to_string(cfg.seed) + " epoch=" +
                            std::to_string(epoch) + " step=" + std::to_string(step) + ")");
      };
      const double total_value = total.scalar();
      if (!std::isfinite(total_value)) throw diverged();
      ZeroGrads(params);
      ag::Backward(total);
      opt.Step(params);
      // a finite loss can still leave overflowed weights behind
      for (const auto &p : params)
        if (!p.var.value().allFinite()) throw diverged();
      log.ce += ce.scalar() / cfg.steps_per_epoch;
      log.adaptation += adapt_value / cfg.steps_per_epoch;
      log.total += total_value / cfg.steps_per_epoch;
      result.step_losses.push_back(total_value);
    }
    if (!eval_target.empty()) log.target_eder = EvaluateEder(sed, eval_target).Rate();
    log.source_accuracy = FrameAccuracy(sed, source);
    result.log.push_back(log);
  }
  return result;
}

// TTS

TtsModel TtsModel::Init(const TtsTrainConfig &cfg, const CorpusSpec &corpus, int style_dim,
                        const NoiseSchedule &schedule, Rng &rng) {
  cfg.Validate();
  TtsModel m;
  ToyScoreNet::Config sc;
  sc.n_mel = corpus.n_mel_channels;
  sc.cond_dim = style_dim;
  sc.time_dim = cfg.time_dim;
  sc.hidden = cfg.hidden;
  m.score_net = ToyScoreNet(sc, schedule, rng);
  m.attention = AttentionParams::Init(style_dim, cfg.n_heads, rng);
  m.attention.positional_encoding = cfg.positional_encoding;
  m.mu_table = ag::Param(UniformInit(corpus.n_phonemes, corpus.n_mel_channels, 1, rng) * 0.1);
  m.content_table = ag::Param(UniformInit(corpus.n_phonemes, style_dim, style_dim, rng));
  m.speaker_table = ag::Param(UniformInit(corpus.n_speakers, style_dim, style_dim, rng));
  m.use_sed_conditioning = cfg.use_sed_conditioning;
  return m;
}

std::vector<NamedParam> TtsModel::Parameters() const {
  std::vector<NamedParam> p = score_net.Parameters();
  for (auto &a : attention.Parameters()) p.push_back(a);
  p.push_back({"tts.mu_table", mu_table});
  p.push_back({"tts.content_table", content_table});
  p.push_back({"tts.speaker_table", speaker_table});
  return p;
}

FrameConditioning BuildConditioning(const TtsModel &model, const FrozenEncoders &enc,
                                    const SyntheticUtterance &reference) {
  const ag::Var mel = ag::Constant(reference.mel);
  const std::vector<Index> frame_to_phoneme = reference.FrameToPhoneme();
  std::vector<Index> ids(reference.phoneme_ids.begin(), reference.phoneme_ids.end());

  const ag::Var utterance_emb = ag::Constant(enc.ser->Forward(mel).embedding.value());
  const ag::Var speaker_emb = ag::SliceRows(model.speaker_table, reference.speaker_id, 1);
  const ag::Var content = ag::GatherRows(model.content_table, ids);

  ag::Var aligned;
  if (model.use_sed_conditioning) {
    const ag::Var style = ag::Constant(enc.sed->Forward(mel).frame_style.value());
    AttentionPositions pos;
    pos.query = reference.PhonemeCenters();
    for (Index f = 0; f < reference.num_frames(); ++f) pos.key.push_back(static_cast<double>(f));
    aligned = CrossAttention(content, style, model.attention, &pos).output;
  } else {
    aligned = ag::Constant(Matrix::Zero(content.rows(), content.cols()));
  }
  const ag::Var zs_phoneme = CombineMultiScale(aligned, utterance_emb, speaker_emb);

  FrameConditioning out;
  out.zs = ag::GatherRows(zs_phoneme, frame_to_phoneme);
  std::vector<Index> frame_ids;
  for (Index p : frame_to_phoneme) frame_ids.push_back(ids[static_cast<std::size_t>(p)]);
  out.mu = ag::GatherRows(model.mu_table, frame_ids);
  return out;
}

TtsLossBreakdown TtsTrainingStep(const TtsModel &model, const FrozenEncoders &enc,
                                 const std::vector<const SyntheticUtterance *> &batch,
                                 const NoiseSchedule &schedule, const TtsTrainConfig &cfg,
                                 Rng &rng) {
  if (batch.empty()) throw DomainError("TTS step needs a non-empty batch");
  const ScoreNetFn net = [&model](const ag::Var &xt, const ag::Var &mu, double t,
                                  const ag::Var &zs) {
    return model.score_net.Forward(xt, mu, t, zs);
  };
  ag::Var diff_total, ce_total;
  TtsLossBreakdown out;
  for (const SyntheticUtterance *u : batch) {
    if (cfg.use_frame_label_loss && !u->soft_labels)
      throw DomainError("utterance " + std::to_string(u->id) + " has no soft labels");
    const FrameConditioning cond = BuildConditioning(model, enc, *u);
    const double t = SampleTrainingTime(schedule, rng, cfg.t_min);
    const ForwardDraw draw = ForwardSample(u->mel, t, schedule, rng);
    const MarginalParams m = GetMarginalParams(schedule, t);

    ag::Var score = net(ag::Constant(draw.xt), cond.mu, t, cond.zs);
    ag::Var residual = ag::Add(score, ag::Constant(draw.eps / m.variance));
    ag::Var diff = ag::Scale(ag::Mean(ag::Square(residual)), m.variance);
    diff_total = diff_total.defined() ? ag::Add(diff_total, diff) : diff;

    if (cfg.use_frame_label_loss && cfg.ce_weight > 0.0 && t <= cfg.ce_max_t) {
      ag::Var x0_hat = EstimateX0(ag::Constant(draw.xt), score, t, schedule);
      ag::Var ce = SoftCrossEntropy(enc.sed->Forward(x0_hat).frame_logits,
                                    u->soft_labels->weights());
      ce_total = ce_total.defined() ? ag::Add(ce_total, ce) : ce;
      ++out.ce_samples;
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  ag::Var total = ag::Scale(diff_total, inv);
  out.diff = total.scalar();
  if (ce_total.defined()) {
    ag::Var ce = ag::Scale(ce_total, inv);
    out.ce = ce.scalar();
    total = ag::Add(total, ag::Scale(ce, cfg.ce_weight));
  }
  out.total = total.scalar();
  if (!std::isfinite(out.total)) throw NumericError("TTS loss became non-finite");
  ag::Backward(total);
  return out;
}

TtsTrainResult TrainTts(TtsModel &model, const FrozenEncoders &enc, const Corpus &train,
                        const NoiseSchedule &schedule, const TtsTrainConfig &cfg) {
  cfg.Validate();
  if (train.empty()) throw DomainError("TTS training needs utterances");
  // encoders stay fixed; no gradient buffers for them
  if (enc.ser != nullptr) SetTrainable(enc.ser->Parameters(), false);
  if (enc.sed != nullptr) SetTrainable(enc.sed->Parameters(), false);
  Rng rng(SubSeed(cfg.seed, 303));
  const auto params = model.Parameters();
  SgdMomentum opt(cfg.learning_rate, cfg.momentum, cfg.max_grad_norm);
  BatchSampler sampler(train.size(), rng);
  TtsTrainResult result;
  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<const SyntheticUtterance *> batch;
    for (std::size_t k : sampler.Next(cfg.batch_size)) batch.push_back(&train[k]);
    ZeroGrads(params);
    try {
      result.steps.push_back(TtsTrainingStep(model, enc, batch, schedule, cfg, rng));
    } catch (const NumericError &e) {
      throw NumericError("TTS training diverged at step " + std::to_string(step) +
                         " (lr=" + std::to_string(cfg.learning_rate) + "): " + e.what());
    }
    opt.Step(params);
    for (const auto &p : params)
      if (!p.var.value().allFinite())
        throw NumericError("TTS training diverged at step " + std::to_string(step) +
                           " (lr=" + std::to_string(cfg.learning_rate) + "): non-finite " +
                           p.name);
  }
  return result;
}

Matrix Synthesize(const TtsModel &model, const FrozenEncoders &enc,
                  const SyntheticUtterance &reference, const NoiseSchedule &schedule,
                  const SamplerConfig &sampler, Rng &rng) {
  const FrameConditioning cond = BuildConditioning(model, enc, reference);
  const Matrix mu = cond.mu.value();
  const Matrix zs = cond.zs.value();
  auto score_fn = [&model](const Matrix &x, double t, const std::pair<Matrix, Matrix> &c) {
    return model.score_net.Evaluate(x, c.first, t, c.second);
  };
  return ReverseSample(score_fn, reference.num_frames(), reference.mel.cols(),
                       std::pair<Matrix, Matrix>(mu, zs), schedule, sampler, rng);
}

EraSummary EvaluateEra(const TtsModel &model, const FrozenEncoders &enc, const ToySED &evaluator,
                       const Corpus &references, const NoiseSchedule &schedule,
                       const SamplerConfig &sampler, std::uint64_t seed) {
  EraSummary out;
  for (std::size_t i = 0; i < references.size(); ++i) {
    const auto &ref = references[i];
    Rng rng(SubSeed(seed, i));
    const Matrix mel = Synthesize(model, enc, ref, schedule, sampler, rng);
    const FrameLabelSequence hyp = Diarize(evaluator, mel, ref.frame_labels.frame_hop);
    out.per_utterance.push_back(Era(ref.frame_labels, hyp));
  }
  out.mean = out.per_utterance.empty()
                 ? 0.0
                 : std::accumulate(out.per_utterance.begin(), out.per_utterance.end(), 0.0) /
                       static_cast<double>(out.per_utterance.size());
  return out;
}

std::vector<double> Smooth(const std::vector<double> &xs, int window) {
  std::vector<double> out;
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    acc += xs[i];
    if (i >= static_cast<std::size_t>(window)) acc -= xs[i - static_cast<std::size_t>(window)];
    out.push_back(acc / static_cast<double>(std::min<std::size_t>(i + 1, static_cast<std::size_t>(window))));
  }
  return out;
}

}  // namespace edlab
