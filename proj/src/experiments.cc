// src/experiments.cc

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

#include "edlab/experiments.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "json.hpp"

namespace edlab {

ExperimentData PrepareData(const ExperimentConfig &cfg) {
  cfg.Validate();
  Corpus all = GenerateCorpus(cfg.corpus);
  ExperimentData d;
  d.source = FilterDomain(all, Domain::kSource);
  Corpus target = FilterDomain(all, Domain::kTarget);
  const std::size_t n_eval = static_cast<std::size_t>(cfg.evaluation.n_eval_target);
  if (target.size() <= n_eval)
    throw ConfigError("evaluation.n_eval_target", "not enough target utterances");
  d.target_train.assign(target.begin(), target.end() - n_eval);
  d.target_eval.assign(target.end() - n_eval, target.end());
  return d;
}

const std::vector<TtsVariant> &TtsAblationVariants() {
  static const std::vector<TtsVariant> kVariants = {
      {"full", true, true, true},
      {"no_sed", false, true, true},
      {"no_frame_label", true, false, true},
      {"no_cross_domain", true, true, false},
  };
  return kVariants;
}

TtsTrainConfig ApplyVariant(TtsTrainConfig cfg, const TtsVariant &v) {
  cfg.use_sed_conditioning = v.use_sed_conditioning;
  cfg.use_frame_label_loss = v.use_frame_label_loss;
  cfg.use_cross_domain_sed = v.use_cross_domain_sed;
  return cfg;
}

TtsRunResult RunTts(const ExperimentConfig &cfg, const ExperimentData &data, const ToySER &ser,
                    const ToySED &conditioning_sed, const ToySED &evaluator) {
  const TtsTrainConfig &tc = cfg.tts_train;
  Corpus train = data.target_train;
  SoftLabelCorpus(conditioning_sed, train);
  Rng rng(SubSeed(tc.seed, 404));
  TtsRunResult r{TtsModel::Init(tc, cfg.corpus, cfg.sed_train.style_dim, cfg.schedule, rng), {},
                 {}};
  FrozenEncoders enc{&ser, &conditioning_sed};
  r.train = TrainTts(r.model, enc, train, cfg.schedule, tc);
  const std::size_t n_ref =
      std::min(data.target_eval.size(), static_cast<std::size_t>(tc.n_syntheses));
  Corpus refs(data.target_eval.begin(), data.target_eval.begin() + n_ref);
  r.era = EvaluateEra(r.model, enc, evaluator, refs, cfg.schedule, cfg.sampler,
                      SubSeed(tc.seed, 505));
  return r;
}

double MeanOf(const std::vector<double> &xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / xs.size();
}

double StdOf(const std::vector<double> &xs) {
  if (xs.size() < 2) return 0.0;
  const double m = MeanOf(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / (xs.size() - 1));
}

int AblationReport::LadderOrderedSeeds() const {
  auto at = [this](const char *m, std::size_t i) { return eder.at(m).at(i); };
  int n = 0;
  for (std::size_t i = 0; i < sed_seeds.size(); ++i) {
    const double mid = std::min(at("mmmd", i), at("lmmd", i));
    if (at("mlmmd", i) <= mid && mid <= at("mmd", i) && at("mmd", i) <= at("none", i)) ++n;
  }
  return n;
}

namespace {

std::string Fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

}  // namespace

std::string AblationReport::EderCsv() const {
  std::ostringstream os;
  os << "mode";
  for (auto s : sed_seeds) os << ",seed_" << s;
  os << ",mean,std\n";
  for (AdaptationMode m : kAllAdaptationModes) {
    const auto it = eder.find(AdaptationModeName(m));
    if (it == eder.end()) continue;
    os << it->first;
    for (double v : it->second) os << "," << Fmt(v);
    os << "," << Fmt(MeanOf(it->second)) << "," << Fmt(StdOf(it->second)) << "\n";
  }
  return os.str();
}

std::string AblationReport::EraCsv() const {
  std::ostringstream os;
  os << "variant";
  for (auto s : tts_seeds) os << ",seed_" << s;
  os << ",mean,std\n";
  for (const auto &v : TtsAblationVariants()) {
    const auto it = era.find(v.name);
    if (it == era.end()) continue;
    os << it->first;
    for (double x : it->second) os << "," << Fmt(x);
    os << "," << Fmt(MeanOf(it->second)) << "," << Fmt(StdOf(it->second)) << "\n";
  }
  return os.str();
}

std::string AblationReport::TidyCsv() const {
  std::ostringstream os;
  os << "study,run,seed,metric,value\n";
  for (const auto &[mode, vals] : eder)
    for (std::size_t i = 0; i < vals.size(); ++i)
      os << "sed," << mode << "," << sed_seeds[i] << ",eder," << Fmt(vals[i]) << "\n";
  for (const auto &[variant, vals] : era)
    for (std::size_t i = 0; i < vals.size(); ++i)
      os << "tts," << variant << "," << tts_seeds[i] << ",era," << Fmt(vals[i]) << "\n";
  return os.str();
}

std::string AblationReport::ToJson() const {
  nlohmann::ordered_json j;
  j["sed_seeds"] = sed_seeds;
  j["tts_seeds"] = tts_seeds;
  j["syntheses_per_seed"] = syntheses_per_seed;
  nlohmann::ordered_json e = nlohmann::ordered_json::object();
  for (const auto &[k, v] : eder)
    e[k] = {{"per_seed", v}, {"mean", MeanOf(v)}, {"std", StdOf(v)}};
  j["eder"] = e;
  nlohmann::ordered_json a = nlohmann::ordered_json::object();
  for (const auto &[k, v] : era)
    a[k] = {{"per_seed", v}, {"mean", MeanOf(v)}, {"std", StdOf(v)}};
  j["era"] = a;
  if (!eder.empty()) j["ladder_ordered_seeds"] = LadderOrderedSeeds();
  return j.dump(2);
}

std::string SeedCheckpointDir(const std::string &root, std::uint64_t seed) {
  return (std::filesystem::path(root) / ("seed_" + std::to_string(seed))).string();
}

namespace {

std::string SerPath(const std::string &dir) {
  return (std::filesystem::path(dir) / "ser.json").string();
}

std::string SedPath(const std::string &dir, AdaptationMode m) {
  return (std::filesystem::path(dir) / ("sed_" + std::string(AdaptationModeName(m)) + ".json"))
      .string();
}

}  // namespace

std::vector<std::string> MissingAblationCheckpoints(const ExperimentConfig &cfg,
                                                    const std::string &dir) {
  std::vector<std::string> missing;
  for (int k = 0; k < cfg.evaluation.sed_seeds; ++k) {
    const std::string d = SeedCheckpointDir(dir, cfg.seed + static_cast<std::uint64_t>(k));
    std::vector<std::string> want = {SerPath(d)};
    for (AdaptationMode m : kAllAdaptationModes) want.push_back(SedPath(d, m));
    for (const auto &p : want)
      if (!std::filesystem::exists(p)) missing.push_back(p);
  }
  return missing;
}

AblationReport RunAblationSuite(const ExperimentConfig &cfg, const AblationOptions &opts,
                                const ProgressFn &progress) {
  auto say = [&progress](const std::string &s) {
    if (progress) progress(s);
  };
  if (!opts.load_dir.empty()) {
    const auto missing = MissingAblationCheckpoints(cfg, opts.load_dir);
    if (!missing.empty()) {
      std::string msg = "missing checkpoints:";
      for (const auto &m : missing) msg += "\n  " + m;
      throw MissingInputError(msg);
    }
  }
  const ExperimentData data = PrepareData(cfg);
  say("corpus: " + std::to_string(data.source.size()) + " source, " +
      std::to_string(data.target_train.size()) + " target train, " +
      std::to_string(data.target_eval.size()) + " target eval");
  AblationReport rep;
  rep.syntheses_per_seed = opts.with_tts
                               ? std::min<int>(cfg.tts_train.n_syntheses,
                                               static_cast<int>(data.target_eval.size()))
                               : 0;
  for (int k = 0; k < cfg.evaluation.sed_seeds; ++k) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(k);
    rep.sed_seeds.push_back(seed);
    SedTrainConfig sc = cfg.sed_train;
    sc.seed = seed;
    const std::string load = opts.load_dir.empty() ? "" : SeedCheckpointDir(opts.load_dir, seed);
    const std::string save = opts.save_dir.empty() ? "" : SeedCheckpointDir(opts.save_dir, seed);
    if (!save.empty()) std::filesystem::create_directories(save);
    const ToySER ser = load.empty() ? TrainSer(sc, data.source, cfg.corpus.n_classes)
                                    : LoadSer(SerPath(load));
    if (!save.empty()) SaveModel(SerPath(save), ser);
    std::optional<ToySED> sed_none, sed_full;
    for (AdaptationMode m : kAllAdaptationModes) {
      sc.adaptation_mode = m;
      const ToySED sed =
          load.empty()
              ? TrainSedCrossDomain(sc, cfg.kernel, ser, data.source, data.target_train, {}).model
              : LoadSed(SedPath(load, m));
      if (!save.empty()) SaveModel(SedPath(save, m), sed);
      const double e = EvaluateEder(sed, data.target_eval).Rate();
      rep.eder[AdaptationModeName(m)].push_back(e);
      say("seed " + std::to_string(seed) + " sed " + AdaptationModeName(m) + " eder " + Fmt(e));
      if (m == AdaptationMode::kNone) sed_none = sed;
      if (m == AdaptationMode::kMlmmd) sed_full = sed;
    }
    if (!opts.with_tts || k >= cfg.evaluation.tts_seeds) continue;
    rep.tts_seeds.push_back(seed);
    for (const auto &v : TtsAblationVariants()) {
      ExperimentConfig run = cfg;
      run.tts_train = ApplyVariant(cfg.tts_train, v);
      run.tts_train.seed = seed;
      const ToySED &cond = v.use_cross_domain_sed ? *sed_full : *sed_none;
      const TtsRunResult r = RunTts(run, data, ser, cond, *sed_full);
      rep.era[v.name].push_back(r.era.mean);
      say("seed " + std::to_string(seed) + " tts " + v.name + " era " + Fmt(r.era.mean));
    }
  }
  return rep;
}

AblationReport RunSedLadder(const ExperimentConfig &cfg, const ProgressFn &progress) {
  AblationOptions opts;
  opts.with_tts = false;
  return RunAblationSuite(cfg, opts, progress);
}

}  // namespace edlab
