// src/synth-corpus.cc

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

#include "edlab/synth-corpus.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "edlab/matrix-io.h"
#include "edlab/toy-models.h"
#include "json.hpp"

namespace edlab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Stream indices for SubSeed, so templates and utterances never share draws.
constexpr std::uint64_t kTemplateStream = 0xC0FFEE;
constexpr std::uint64_t kShiftStream = 0x5EED;

int UniformInt(Rng &rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Index drawn proportionally to `w`, never returning `exclude`.
int WeightedInt(Rng &rng, const std::vector<double> &w, int exclude) {
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (static_cast<int>(i) != exclude) total += w[i];
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  int last = -1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (static_cast<int>(i) == exclude || w[i] <= 0.0) continue;
    last = static_cast<int>(i);
    if (u < w[i]) return last;
    u -= w[i];
  }
  return last;
}

}  // namespace

const char *DomainName(Domain d) { return d == Domain::kSource ? "source" : "target"; }

Domain ParseDomain(const std::string &name) {
  if (name == "source") return Domain::kSource;
  if (name == "target") return Domain::kTarget;
  throw DomainError("unknown domain '" + name + "'");
}

void CorpusSpec::Validate() const {
  if (n_utterances < 1) throw ConfigError("corpus.n_utterances", "must be >= 1");
  if (n_mel_channels < 1) throw ConfigError("corpus.n_mel_channels", "must be >= 1");
  if (!(frame_hop > 0.0)) throw ConfigError("corpus.frame_hop", "must be positive");
  if (min_frames < 8) throw ConfigError("corpus.min_frames", "utterances need >= 8 frames");
  if (max_frames < min_frames) throw ConfigError("corpus.max_frames", "must be >= min_frames");
  if (n_classes < 2) throw ConfigError("corpus.n_classes", "need >= 2 classes (0 is neutral)");
  if (n_speakers < 1) throw ConfigError("corpus.n_speakers", "must be >= 1");
  if (n_phonemes < 1) throw ConfigError("corpus.n_phonemes", "must be >= 1");
  if (max_segments < 1) throw ConfigError("corpus.max_segments", "must be >= 1");
  if (max_segments * 4 > min_frames)
    throw ConfigError("corpus.max_segments", "segments need >= 4 frames each");
  if (!(target_fraction >= 0.0 && target_fraction <= 1.0))
    throw ConfigError("corpus.target_fraction", "must lie in [0, 1]");
  if (noise_std < 0.0) throw ConfigError("corpus.noise_std", "must be >= 0");
  if (domain_shift.gain_max < domain_shift.gain_min)
    throw ConfigError("corpus.domain_shift.gain_max", "must be >= gain_min");
  if (domain_shift.bias_max < 0.0 || domain_shift.noise_std < 0.0)
    throw ConfigError("corpus.domain_shift", "bias_max and noise_std must be >= 0");
  if (!target_class_weights.empty()) {
    if (static_cast<int>(target_class_weights.size()) != n_classes)
      throw ConfigError("corpus.target_class_weights", "needs one entry per class");
    int positive = 0;
    for (double w : target_class_weights) {
      if (!(w >= 0.0)) throw ConfigError("corpus.target_class_weights", "entries must be >= 0");
      positive += w > 0.0;
    }
    if (positive < 2 && max_segments > 1)
      throw ConfigError("corpus.target_class_weights", "need >= 2 positive entries");
  }
}

std::vector<Index> SyntheticUtterance::FrameToPhoneme() const {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(num_frames()));
  for (std::size_t p = 0; p < phoneme_frames.size(); ++p)
    for (int k = 0; k < phoneme_frames[p]; ++k) out.push_back(static_cast<Index>(p));
  return out;
}

std::vector<double> SyntheticUtterance::PhonemeCenters() const {
  std::vector<double> out;
  double at = 0.0;
  for (int len : phoneme_frames) {
    out.push_back(at + 0.5 * (len - 1));
    at += len;
  }
  return out;
}

RowVector CorpusTemplates::ClassFrame(int c, double seconds, double modulation_depth) const {
  const double mod =
      1.0 + modulation_depth * std::sin(2.0 * std::numbers::pi * class_rates[c] * seconds);
  return class_means.row(c) * mod;
}

CorpusTemplates MakeTemplates(const CorpusSpec &spec) {
  spec.Validate();
  CorpusTemplates t;
  Rng rng(SubSeed(spec.seed, kTemplateStream));
  t.class_means = spec.template_scale * StandardNormal(spec.n_classes, spec.n_mel_channels, rng);
  for (int c = 0; c < spec.n_classes; ++c) t.class_rates.push_back(1.5 + 1.5 * c);
  t.phoneme_means = spec.phoneme_scale * StandardNormal(spec.n_phonemes, spec.n_mel_channels, rng);
  t.speaker_offsets =
      spec.speaker_scale * StandardNormal(spec.n_speakers, spec.n_mel_channels, rng);

  Rng shift_rng(SubSeed(spec.seed, kShiftStream));
  const DomainShift &ds = spec.domain_shift;
  std::uniform_real_distribution<double> gain(ds.gain_min, ds.gain_max);
  std::uniform_real_distribution<double> bias(-ds.bias_max, ds.bias_max);
  t.shift_gain.resize(spec.n_mel_channels);
  t.shift_bias.resize(spec.n_mel_channels);
  for (int ch = 0; ch < spec.n_mel_channels; ++ch) {
    t.shift_gain(ch) = ds.gain_max > ds.gain_min ? gain(shift_rng) : ds.gain_min;
    t.shift_bias(ch) = ds.bias_max > 0.0 ? bias(shift_rng) : 0.0;
  }
  return t;
}

namespace {

SyntheticUtterance GenerateUtterance(const CorpusSpec &spec, const CorpusTemplates &tpl,
                                     int index, Domain domain) {
  Rng rng(SubSeed(spec.seed, static_cast<std::uint64_t>(index)));
  SyntheticUtterance u;
  u.id = index;
  u.domain = domain;
  const int n = UniformInt(rng, spec.min_frames, spec.max_frames);
  u.speaker_id = UniformInt(rng, 0, spec.n_speakers - 1);

  // Emotion segments: 1..max_segments contiguous runs, each >= 4 frames,
  // adjacent runs carry different labels.
  const int n_seg = UniformInt(rng, 1, spec.max_segments);
  std::vector<int> cuts = {0};
  for (int s = 1; s < n_seg; ++s) {
    const int lo = cuts.back() + 4;
    const int hi = n - 4 * (n_seg - s);
    cuts.push_back(UniformInt(rng, lo, hi));
  }
  cuts.push_back(n);
  u.frame_labels.frame_hop = spec.frame_hop;
  u.frame_labels.labels.resize(static_cast<std::size_t>(n));
  int prev = -1;
  for (int s = 0; s < n_seg; ++s) {
    int label;
    if (domain == Domain::kTarget && !spec.target_class_weights.empty()) {
      label = WeightedInt(rng, spec.target_class_weights, prev);
    } else {
      label = UniformInt(rng, 0, spec.n_classes - 1);
      if (label == prev)
        label = (label + 1 + UniformInt(rng, 0, spec.n_classes - 2)) % spec.n_classes;
    }
    prev = label;
    for (int f = cuts[s]; f < cuts[s + 1]; ++f) u.frame_labels.labels[static_cast<std::size_t>(f)] = label;
  }
  u.segments = FramesToSegments(u.frame_labels);

  // Phoneme alignment: 2..6 frames each; a short tail merges into the last.
  int covered = 0;
  while (covered < n) {
    int len = UniformInt(rng, 2, 6);
    if (n - covered - len < 2) len = n - covered;
    u.phoneme_ids.push_back(UniformInt(rng, 0, spec.n_phonemes - 1));
    u.phoneme_frames.push_back(len);
    covered += len;
  }

  u.mel.resize(n, spec.n_mel_channels);
  const Matrix noise = spec.noise_std * StandardNormal(n, spec.n_mel_channels, rng);
  const auto phon = u.FrameToPhoneme();
  for (int f = 0; f < n; ++f) {
    const int c = u.frame_labels.labels[static_cast<std::size_t>(f)];
    u.mel.row(f) = tpl.ClassFrame(c, f * spec.frame_hop, spec.modulation_depth) +
                   tpl.phoneme_means.row(u.phoneme_ids[static_cast<std::size_t>(phon[f])]) +
                   tpl.speaker_offsets.row(u.speaker_id);
  }
  u.mel += noise;
  if (domain == Domain::kTarget) {
    const Matrix extra = spec.domain_shift.noise_std * StandardNormal(n, spec.n_mel_channels, rng);
    for (int f = 0; f < n; ++f)
      u.mel.row(f) = u.mel.row(f).cwiseProduct(tpl.shift_gain) + tpl.shift_bias;
    u.mel += extra;
  }
  return u;
}

}  // namespace

Corpus GenerateCorpus(const CorpusSpec &spec) {
  spec.Validate();
  const CorpusTemplates tpl = MakeTemplates(spec);
  const int n_target =
      static_cast<int>(std::lround(spec.target_fraction * spec.n_utterances));
  const int n_source = spec.n_utterances - n_target;
  Corpus out;
  out.reserve(static_cast<std::size_t>(spec.n_utterances));
  for (int i = 0; i < spec.n_utterances; ++i)
    out.push_back(GenerateUtterance(spec, tpl, i, i < n_source ? Domain::kSource : Domain::kTarget));
  return out;
}

Corpus FilterDomain(const Corpus &corpus, Domain domain) {
  Corpus out;
  for (const auto &u : corpus)
    if (u.domain == domain) out.push_back(u);
  return out;
}

void SoftLabelCorpus(const ToySED &sed, Corpus &corpus) {
  for (auto &u : corpus) {
    const Matrix logits = sed.Forward(ag::Constant(u.mel)).frame_logits.value();
    u.soft_labels = SoftLabelMatrix(Softmax(logits));
  }
}

std::string CorpusSpecToJson(const CorpusSpec &s) {
  ordered_json j = {{"n_utterances", s.n_utterances},
                    {"n_mel_channels", s.n_mel_channels},
                    {"frame_hop", s.frame_hop},
                    {"min_frames", s.min_frames},
                    {"max_frames", s.max_frames},
                    {"n_classes", s.n_classes},
                    {"n_speakers", s.n_speakers},
                    {"n_phonemes", s.n_phonemes},
                    {"max_segments", s.max_segments},
                    {"target_fraction", s.target_fraction},
                    {"template_scale", s.template_scale},
                    {"modulation_depth", s.modulation_depth},
                    {"phoneme_scale", s.phoneme_scale},
                    {"speaker_scale", s.speaker_scale},
                    {"noise_std", s.noise_std},
                    {"domain_shift",
                     {{"gain_min", s.domain_shift.gain_min},
                      {"gain_max", s.domain_shift.gain_max},
                      {"bias_max", s.domain_shift.bias_max},
                      {"noise_std", s.domain_shift.noise_std}}},
                    {"target_class_weights", s.target_class_weights},
                    {"seed", s.seed}};
  return j.dump();
}

namespace {

std::string Numbered(const char *prefix, int id, const char *ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%05d%s", prefix, id, ext);
  return buf;
}

}  // namespace

void SaveCorpus(const std::string &dir, const CorpusSpec &spec, const Corpus &corpus) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  ordered_json manifest;
  manifest["format_version"] = 1;
  manifest["spec"] = ordered_json::parse(CorpusSpecToJson(spec));
  manifest["utterances"] = ordered_json::array();
  for (const auto &u : corpus) {
    const std::string mel_file = Numbered("mel_", u.id, ".bin");
    const std::string seg_file = Numbered("seg_", u.id, ".csv");
    WriteMatrix((fs::path(dir) / mel_file).string(), u.mel);
    std::ostringstream csv;
    WriteSegmentsCsv(csv, u.segments);
    WriteTextFile((fs::path(dir) / seg_file).string(), csv.str());
    manifest["utterances"].push_back({{"id", u.id},
                                      {"mel", mel_file},
                                      {"segments", seg_file},
                                      {"n_frames", u.num_frames()},
                                      {"speaker", u.speaker_id},
                                      {"domain", DomainName(u.domain)},
                                      {"frame_labels", u.frame_labels.labels},
                                      {"phoneme_ids", u.phoneme_ids},
                                      {"phoneme_frames", u.phoneme_frames}});
  }
  WriteTextFile((fs::path(dir) / "manifest.json").string(), manifest.dump(1) + "\n");
}

Corpus LoadCorpus(const std::string &dir, CorpusSpec *spec) {
  namespace fs = std::filesystem;
  const json manifest = json::parse(ReadTextFile((fs::path(dir) / "manifest.json").string()));
  const double hop = manifest.at("spec").at("frame_hop").get<double>();
  if (spec != nullptr) {
    const auto &s = manifest.at("spec");
    spec->n_utterances = s.at("n_utterances");
    spec->n_mel_channels = s.at("n_mel_channels");
    spec->frame_hop = hop;
    spec->min_frames = s.at("min_frames");
    spec->max_frames = s.at("max_frames");
    spec->n_classes = s.at("n_classes");
    spec->n_speakers = s.at("n_speakers");
    spec->n_phonemes = s.at("n_phonemes");
    spec->max_segments = s.at("max_segments");
    spec->target_fraction = s.at("target_fraction");
    spec->template_scale = s.at("template_scale");
    spec->modulation_depth = s.at("modulation_depth");
    spec->phoneme_scale = s.at("phoneme_scale");
    spec->speaker_scale = s.at("speaker_scale");
    spec->noise_std = s.at("noise_std");
    spec->domain_shift = {s.at("domain_shift").at("gain_min"), s.at("domain_shift").at("gain_max"),
                          s.at("domain_shift").at("bias_max"), s.at("domain_shift").at("noise_std")};
    spec->target_class_weights =
        s.value("target_class_weights", std::vector<double>{});
    spec->seed = s.at("seed");
  }
  Corpus out;
  for (const auto &e : manifest.at("utterances")) {
    SyntheticUtterance u;
    u.id = e.at("id");
    u.mel = ReadMatrix((fs::path(dir) / e.at("mel").get<std::string>()).string());
    u.speaker_id = e.at("speaker");
    u.domain = ParseDomain(e.at("domain").get<std::string>());
    u.frame_labels.frame_hop = hop;
    u.frame_labels.labels = e.at("frame_labels").get<std::vector<int>>();
    u.phoneme_ids = e.at("phoneme_ids").get<std::vector<int>>();
    u.phoneme_frames = e.at("phoneme_frames").get<std::vector<int>>();
    std::istringstream csv(ReadTextFile((fs::path(dir) / e.at("segments").get<std::string>()).string()));
    u.segments = ReadSegmentsCsv(csv);
    if (static_cast<Index>(u.frame_labels.labels.size()) != u.num_frames())
      throw ShapeError(dir + ": utterance " + std::to_string(u.id) + " label count mismatch");
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace edlab
