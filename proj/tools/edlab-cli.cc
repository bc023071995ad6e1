// tools/edlab-cli.cc

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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "edlab/experiments.h"
#include "edlab/matrix-io.h"
#include "json.hpp"
#include "selftest.h"

#ifndef EDLAB_VERSION
#define EDLAB_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace edlab;
using nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitMissing = 2;
constexpr int kExitNumeric = 3;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

void AddCommon(CLI::App *cmd, Common &c) {
  cmd->add_option("--config", c.config_path, "experiment config JSON (defaults if omitted)");
  cmd->add_option("--seed", c.seed, "master seed, overrides the config");
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
}

ExperimentConfig ResolveConfig(const Common &c) {
  ExperimentConfig cfg = DefaultExperimentConfig();
  if (!c.config_path.empty()) {
    if (!fs::exists(c.config_path)) throw MissingInputError("config not found: " + c.config_path);
    cfg = ParseExperimentConfig(ReadTextFile(c.config_path));
  }
  if (c.seed) OverrideSeed(cfg, *c.seed);
  cfg.Validate();
  return cfg;
}

// Every command leaves its resolved config and the version next to its outputs.
void EchoConfig(const std::string &out, const ExperimentConfig &cfg) {
  fs::create_directories(out);
  WriteTextFile((fs::path(out) / "resolved_config.json").string(),
                ExperimentConfigToJson(cfg) + "\n");
  WriteTextFile((fs::path(out) / "VERSION").string(), std::string(EDLAB_VERSION) + "\n");
}

std::string OutPath(const std::string &out, const std::string &name) {
  return (fs::path(out) / name).string();
}

std::string Fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

void RequireFiles(const std::vector<std::string> &paths) {
  std::string missing;
  for (const auto &p : paths)
    if (!fs::exists(p)) missing += "\n  " + p;
  if (!missing.empty()) throw MissingInputError("missing inputs:" + missing);
}

std::string SedFile(const std::string &dir, AdaptationMode m) {
  return OutPath(dir, "sed_" + std::string(AdaptationModeName(m)) + ".json");
}

// Mode of the SED a TTS run conditions on.
AdaptationMode ConditioningMode(const ExperimentConfig &cfg) {
  return cfg.tts_train.use_cross_domain_sed ? cfg.sed_train.adaptation_mode
                                            : AdaptationMode::kNone;
}

TtsModel BuildTts(const ExperimentConfig &cfg) {
  Rng rng(SubSeed(cfg.tts_train.seed, 404));
  return TtsModel::Init(cfg.tts_train, cfg.corpus, cfg.sed_train.style_dim, cfg.schedule, rng);
}

// ---- gen-corpus

int GenCorpus(const Common &c) {
  const ExperimentConfig cfg = ResolveConfig(c);
  EchoConfig(c.out, cfg);
  const Corpus corpus = GenerateCorpus(cfg.corpus);
  SaveCorpus(OutPath(c.out, "corpus"), cfg.corpus, corpus);
  std::cout << "wrote " << corpus.size() << " utterances to " << OutPath(c.out, "corpus") << "\n";
  return 0;
}

// ---- train-sed

int TrainSed(const Common &c, const std::string &mode_arg) {
  ExperimentConfig cfg = ResolveConfig(c);
  std::vector<AdaptationMode> modes;
  if (mode_arg == "all") {
    modes.assign(std::begin(kAllAdaptationModes), std::end(kAllAdaptationModes));
  } else if (!mode_arg.empty()) {
    try {
      modes.push_back(ParseAdaptationMode(mode_arg));
    } catch (const DomainError &e) {
      throw ConfigError("--mode", e.what());
    }
  } else {
    modes.push_back(cfg.sed_train.adaptation_mode);
  }
  EchoConfig(c.out, cfg);
  const ExperimentData data = PrepareData(cfg);
  const ToySER ser = TrainSer(cfg.sed_train, data.source, cfg.corpus.n_classes);
  SaveModel(OutPath(c.out, "ser.json"), ser);
  std::ostringstream log;
  ordered_json summary = ordered_json::object();
  for (AdaptationMode m : modes) {
    SedTrainConfig sc = cfg.sed_train;
    sc.adaptation_mode = m;
    const SedTrainResult r =
        TrainSedCrossDomain(sc, cfg.kernel, ser, data.source, data.target_train, data.target_eval);
    SaveModel(SedFile(c.out, m), r.model);
    for (const auto &e : r.log)
      log << ordered_json{{"run", AdaptationModeName(m)}, {"epoch", e.epoch},
                          {"ce", e.ce},                  {"adaptation", e.adaptation},
                          {"total", e.total},            {"target_eder", e.target_eder},
                          {"source_accuracy", e.source_accuracy}}
                 .dump()
          << "\n";
    const double eder = EvaluateEder(r.model, data.target_eval).Rate();
    summary[AdaptationModeName(m)] = {{"target_eder", eder},
                                      {"source_accuracy", FrameAccuracy(r.model, data.source)}};
    std::cout << AdaptationModeName(m) << " target EDER " << Fmt6(eder) << "\n";
  }
  WriteTextFile(OutPath(c.out, "metrics.jsonl"), log.str());
  WriteTextFile(OutPath(c.out, "sed_summary.json"), summary.dump(2) + "\n");
  return 0;
}

// ---- eval-eder

int EvalEder(const Common &c, const std::string &ref, const std::string &hyp,
             const std::string &ckpt) {
  const ExperimentConfig cfg = ResolveConfig(c);
  if (!ref.empty() || !hyp.empty()) {
    if (ref.empty() || hyp.empty()) throw ConfigError("--ref/--hyp", "give both files");
    RequireFiles({ref, hyp});
    EchoConfig(c.out, cfg);
    std::ifstream r(ref), h(hyp);
    const double rate = Eder(ReadSegmentsCsv(r), ReadSegmentsCsv(h));
    WriteTextFile(OutPath(c.out, "eder.json"),
                  ordered_json{{"ref", ref}, {"hyp", hyp}, {"eder", rate}}.dump(2) + "\n");
    std::cout << Fmt6(rate) << "\n";
    return 0;
  }
  const std::string dir = ckpt.empty() ? cfg.paths.checkpoint_dir : ckpt;
  const std::string path = SedFile(dir, cfg.sed_train.adaptation_mode);
  RequireFiles({path});
  EchoConfig(c.out, cfg);
  const ExperimentData data = PrepareData(cfg);
  const EderBreakdown b = EvaluateEder(LoadSed(path), data.target_eval);
  ordered_json j = {{"checkpoint", path},          {"eder", b.Rate()},
                    {"false_alarm", b.false_alarm}, {"missed", b.missed},
                    {"confusion", b.confusion},     {"total_duration", b.total_duration}};
  WriteTextFile(OutPath(c.out, "eder.json"), j.dump(2) + "\n");
  std::cout << Fmt6(b.Rate()) << "\n";
  return 0;
}

// ---- train-tts

int TrainTtsCmd(const Common &c, const std::string &ckpt) {
  const ExperimentConfig cfg = ResolveConfig(c);
  const std::string dir = ckpt.empty() ? cfg.paths.checkpoint_dir : ckpt;
  const std::string ser_path = OutPath(dir, "ser.json");
  const std::string sed_path = SedFile(dir, ConditioningMode(cfg));
  RequireFiles({ser_path, sed_path});
  EchoConfig(c.out, cfg);
  const ExperimentData data = PrepareData(cfg);
  const ToySER ser = LoadSer(ser_path);
  const ToySED sed = LoadSed(sed_path);
  Corpus train = data.target_train;
  SoftLabelCorpus(sed, train);
  TtsModel model = BuildTts(cfg);
  const TtsTrainResult r = TrainTts(model, {&ser, &sed}, train, cfg.schedule, cfg.tts_train);
  SaveCheckpoint(OutPath(c.out, "tts.json"), "tts", ExperimentConfigToJson(cfg),
                 model.Parameters());
  std::ostringstream log;
  for (std::size_t i = 0; i < r.steps.size(); ++i)
    log << ordered_json{{"step", i},
                        {"diff", r.steps[i].diff},
                        {"ce", r.steps[i].ce},
                        {"total", r.steps[i].total},
                        {"ce_samples", r.steps[i].ce_samples}}
               .dump()
        << "\n";
  WriteTextFile(OutPath(c.out, "metrics.jsonl"), log.str());
  std::vector<double> totals;
  for (const auto &s : r.steps) totals.push_back(s.total);
  const auto smooth = Smooth(totals, 50);
  std::cout << "tts loss " << Fmt6(smooth.front()) << " -> " << Fmt6(smooth.back()) << "\n";
  return 0;
}

struct TtsInputs {
  ToySER ser;
  ToySED sed;
  ToySED evaluator;
  TtsModel model;
};

TtsInputs LoadTtsInputs(const ExperimentConfig &cfg, const std::string &ckpt,
                        const std::string &tts_path) {
  const std::string dir = ckpt.empty() ? cfg.paths.checkpoint_dir : ckpt;
  const std::string ser_path = OutPath(dir, "ser.json");
  const std::string sed_path = SedFile(dir, ConditioningMode(cfg));
  const std::string eval_path = SedFile(dir, cfg.sed_train.adaptation_mode);
  RequireFiles({ser_path, sed_path, eval_path, tts_path});
  TtsInputs in{LoadSer(ser_path), LoadSed(sed_path), LoadSed(eval_path), BuildTts(cfg)};
  LoadCheckpoint(tts_path, "tts", in.model.Parameters());
  return in;
}

// ---- synthesize

int SynthesizeCmd(const Common &c, const std::string &ckpt, const std::string &tts, int n) {
  const ExperimentConfig cfg = ResolveConfig(c);
  const TtsInputs in = LoadTtsInputs(cfg, ckpt, tts);
  EchoConfig(c.out, cfg);
  const ExperimentData data = PrepareData(cfg);
  const int count = std::min<int>(n, static_cast<int>(data.target_eval.size()));
  ordered_json manifest = ordered_json::array();
  for (int i = 0; i < count; ++i) {
    const auto &ref = data.target_eval[static_cast<std::size_t>(i)];
    Rng rng(SubSeed(SubSeed(cfg.tts_train.seed, 505), static_cast<std::uint64_t>(i)));
    const Matrix mel = Synthesize(in.model, {&in.ser, &in.sed}, ref, cfg.schedule, cfg.sampler, rng);
    char name[64];
    std::snprintf(name, sizeof(name), "synth_%05d.bin", ref.id);
    WriteMatrix(OutPath(c.out, name), mel);
    const FrameLabelSequence hyp = Diarize(in.evaluator, mel, ref.frame_labels.frame_hop);
    manifest.push_back({{"reference", ref.id},
                        {"mel", name},
                        {"n_frames", mel.rows()},
                        {"era", Era(ref.frame_labels, hyp)}});
  }
  WriteTextFile(OutPath(c.out, "synth_manifest.json"), manifest.dump(1) + "\n");
  std::cout << "wrote " << count << " syntheses\n";
  return 0;
}

// ---- eval-era

int EvalEraCmd(const Common &c, const std::string &ckpt, const std::string &tts) {
  const ExperimentConfig cfg = ResolveConfig(c);
  const TtsInputs in = LoadTtsInputs(cfg, ckpt, tts);
  EchoConfig(c.out, cfg);
  const ExperimentData data = PrepareData(cfg);
  const std::size_t n_ref =
      std::min(data.target_eval.size(), static_cast<std::size_t>(cfg.tts_train.n_syntheses));
  const Corpus refs(data.target_eval.begin(), data.target_eval.begin() + n_ref);
  const EraSummary era = EvaluateEra(in.model, {&in.ser, &in.sed}, in.evaluator, refs,
                                     cfg.schedule, cfg.sampler, SubSeed(cfg.tts_train.seed, 505));
  ordered_json j = {{"era", era.mean}, {"n_syntheses", n_ref}, {"per_utterance", era.per_utterance}};
  WriteTextFile(OutPath(c.out, "era.json"), j.dump(2) + "\n");
  std::cout << Fmt6(era.mean) << "\n";
  return 0;
}

// ---- ablate

int Ablate(const Common &c, const std::string &from, bool sed_only) {
  const ExperimentConfig cfg = ResolveConfig(c);
  if (!from.empty()) {
    const auto missing = MissingAblationCheckpoints(cfg, from);
    if (!missing.empty()) {
      std::string msg = "missing checkpoints:";
      for (const auto &m : missing) msg += "\n  " + m;
      throw MissingInputError(msg);
    }
  }
  EchoConfig(c.out, cfg);
  AblationOptions opts;
  opts.with_tts = !sed_only;
  opts.load_dir = from;
  if (from.empty()) opts.save_dir = OutPath(c.out, "checkpoints");
  std::ostringstream log;
  const AblationReport rep = RunAblationSuite(cfg, opts, [&log](const std::string &s) {
    std::cout << s << std::endl;
    log << ordered_json{{"event", s}}.dump() << "\n";
  });
  WriteTextFile(OutPath(c.out, "progress.jsonl"), log.str());
  WriteTextFile(OutPath(c.out, "eder_ladder.csv"), rep.EderCsv());
  if (!sed_only) WriteTextFile(OutPath(c.out, "era_ablation.csv"), rep.EraCsv());
  WriteTextFile(OutPath(c.out, "tidy.csv"), rep.TidyCsv());
  WriteTextFile(OutPath(c.out, "report.json"), rep.ToJson() + "\n");
  std::cout << rep.EderCsv();
  if (!sed_only) std::cout << rep.EraCsv();
  return 0;
}

// ---- selftest

int SelftestCmd(const Common &c) {
  const SelftestReport r = RunSelftest(std::cout);
  fs::create_directories(c.out);
  WriteTextFile(OutPath(c.out, "selftest.json"), r.json + "\n");
  WriteTextFile(OutPath(c.out, "VERSION"), std::string(EDLAB_VERSION) + "\n");
  std::cout << (r.failures == 0 ? "selftest: all checks passed" : "selftest: FAILED") << "\n";
  return r.failures == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"edlab: emotion diarization and diffusion TTS toy lab (" EDLAB_VERSION ")"};
  app.set_version_flag("--version", EDLAB_VERSION);
  app.require_subcommand(1);
  Common common;

  auto *gen = app.add_subcommand("gen-corpus", "generate the synthetic two-domain corpus");
  AddCommon(gen, common);

  std::string mode;
  auto *tsed = app.add_subcommand("train-sed", "train the SER and a cross-domain SED");
  AddCommon(tsed, common);
  tsed->add_option("--mode", mode, "none|mmd|mmmd|lmmd|mlmmd|all (default: config)");

  std::string ref, hyp, ckpt;
  auto *eder = app.add_subcommand("eval-eder", "EDER of two segment CSVs or of a trained SED");
  AddCommon(eder, common);
  eder->add_option("--ref", ref, "reference segment CSV");
  eder->add_option("--hyp", hyp, "hypothesis segment CSV");
  eder->add_option("--checkpoints", ckpt, "directory holding sed_<mode>.json");

  auto *ttts = app.add_subcommand("train-tts", "train the conditioned diffusion TTS");
  AddCommon(ttts, common);
  ttts->add_option("--checkpoints", ckpt, "directory holding ser.json and sed_<mode>.json");

  std::string tts_path;
  int n_synth = 10;
  auto *syn = app.add_subcommand("synthesize", "reverse-sample mels for held-out references");
  AddCommon(syn, common);
  syn->add_option("--checkpoints", ckpt, "encoder checkpoint directory");
  syn->add_option("--tts", tts_path, "TTS checkpoint")->required();
  syn->add_option("-n", n_synth, "number of references")->capture_default_str();

  auto *era = app.add_subcommand("eval-era", "emotion reclassification accuracy of a TTS model");
  AddCommon(era, common);
  era->add_option("--checkpoints", ckpt, "encoder checkpoint directory");
  era->add_option("--tts", tts_path, "TTS checkpoint")->required();

  std::string from;
  bool sed_only = false;
  auto *abl = app.add_subcommand("ablate", "EDER ladder and TTS ablation tables");
  AddCommon(abl, common);
  abl->add_option("--from-checkpoints", from, "reuse per-seed encoders from a previous run");
  abl->add_flag("--sed-only", sed_only, "skip the TTS ablations");

  auto *self = app.add_subcommand("selftest", "analytic and brute-force oracle checks");
  AddCommon(self, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitConfig;
  }

  std::cerr << "edlab " << EDLAB_VERSION << "\n";
  try {
    if (*gen) return GenCorpus(common);
    if (*tsed) return TrainSed(common, mode);
    if (*eder) return EvalEder(common, ref, hyp, ckpt);
    if (*ttts) return TrainTtsCmd(common, ckpt);
    if (*syn) return SynthesizeCmd(common, ckpt, tts_path, n_synth);
    if (*era) return EvalEraCmd(common, ckpt, tts_path);
    if (*abl) return Ablate(common, from, sed_only);
    if (*self) return SelftestCmd(common);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MissingInputError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissing;
  } catch (const NumericError &e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
