// tests/test-training.cc

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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "edlab/experiments.h"
#include "edlab/training.h"
#include "test-util.h"

using namespace edlab;

namespace {

// Small corpus with randomly initialised encoders, for loss-plumbing tests.
struct Fixture {
  CorpusSpec spec;
  Corpus corpus;
  ToySER ser;
  ToySED sed;
  NoiseSchedule schedule;

  Fixture() {
    spec.n_utterances = 16;
    corpus = GenerateCorpus(spec);
    Rng rng(5);
    ser = ToySER(ToySER::Config{}, rng);
    sed = ToySED(ToySED::Config{}, rng);
    SoftLabelCorpus(sed, corpus);
  }
  FrozenEncoders Encoders() const { return {&ser, &sed}; }
  std::vector<const SyntheticUtterance *> Batch(int n) const {
    std::vector<const SyntheticUtterance *> b;
    for (int i = 0; i < n; ++i) b.push_back(&corpus[static_cast<std::size_t>(i)]);
    return b;
  }
};

bool SameParams(const std::vector<NamedParam> &a, const std::vector<NamedParam> &b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].var.value() != b[i].var.value()) return false;
  return true;
}

// Shared default-config SED runs; trained once per process.
struct SedRuns {
  ExperimentConfig cfg = DefaultExperimentConfig();
  ExperimentData data = PrepareData(cfg);
  ToySER ser = TrainSer(cfg.sed_train, data.source, cfg.corpus.n_classes);
  SedTrainResult none, mlmmd;

  SedRuns() {
    SedTrainConfig c = cfg.sed_train;
    c.adaptation_mode = AdaptationMode::kNone;
    none = TrainSedCrossDomain(c, cfg.kernel, ser, data.source, data.target_train, data.target_eval);
    c.adaptation_mode = AdaptationMode::kMlmmd;
    mlmmd = TrainSedCrossDomain(c, cfg.kernel, ser, data.source, data.target_train, data.target_eval);
  }
  static const SedRuns &Get() {
    static const SedRuns runs;
    return runs;
  }
};

}  // namespace

TEST_CASE("adaptation mode names round trip") {
  for (AdaptationMode m : kAllAdaptationModes) CHECK(ParseAdaptationMode(AdaptationModeName(m)) == m);
  CHECK_THROWS(ParseAdaptationMode("dann"));
}

TEST_CASE("pool windows cover the frames") {
  CHECK(PoolWindows(16, 8) == std::vector<std::pair<Index, Index>>{{0, 8}, {8, 8}});
  CHECK(PoolWindows(19, 8) == std::vector<std::pair<Index, Index>>{{0, 8}, {8, 11}});
  CHECK(PoolWindows(5, 8) == std::vector<std::pair<Index, Index>>{{0, 5}});
}

TEST_CASE("mode none equals mlmmd with zero weight") {
  CorpusSpec spec;
  spec.n_utterances = 40;
  const Corpus c = GenerateCorpus(spec);
  const Corpus src = FilterDomain(c, Domain::kSource), tgt = FilterDomain(c, Domain::kTarget);
  SedTrainConfig cfg;
  cfg.epochs = 2;
  cfg.steps_per_epoch = 4;
  cfg.ser_epochs = 2;
  const ToySER ser = TrainSer(cfg, src, spec.n_classes);
  cfg.adaptation_mode = AdaptationMode::kNone;
  const SedTrainResult a = TrainSedCrossDomain(cfg, KernelConfig{}, ser, src, tgt, {});
  cfg.adaptation_mode = AdaptationMode::kMlmmd;
  cfg.lambda_weight = 0.0;
  const SedTrainResult b = TrainSedCrossDomain(cfg, KernelConfig{}, ser, src, tgt, {});
  CHECK(a.step_losses == b.step_losses);
  CHECK(SameParams(a.model.Parameters(), b.model.Parameters()));
  CHECK(b.log.back().adaptation > 0.0);  // the term was computed, just not weighted
  cfg.lambda_weight = 0.5;
  const SedTrainResult d = TrainSedCrossDomain(cfg, KernelConfig{}, ser, src, tgt, {});
  CHECK_FALSE(SameParams(a.model.Parameters(), d.model.Parameters()));
}

TEST_CASE("SED training is seeded and never reads target labels") {
  CorpusSpec spec;
  spec.n_utterances = 30;
  const Corpus c = GenerateCorpus(spec);
  const Corpus src = FilterDomain(c, Domain::kSource);
  Corpus tgt = FilterDomain(c, Domain::kTarget);
  SedTrainConfig cfg;
  cfg.epochs = 1;
  cfg.steps_per_epoch = 3;
  cfg.ser_epochs = 1;
  const ToySER ser = TrainSer(cfg, src, spec.n_classes);
  const SedTrainResult a = TrainSedCrossDomain(cfg, KernelConfig{}, ser, src, tgt, {});
  const SedTrainResult b = TrainSedCrossDomain(cfg, KernelConfig{}, ser, src, tgt, {});
  CHECK(SameParams(a.model.Parameters(), b.model.Parameters()));
  for (auto &u : tgt) std::fill(u.frame_labels.labels.begin(), u.frame_labels.labels.end(), 3);
  const SedTrainResult e = TrainSedCrossDomain(cfg, KernelConfig{}, ser, src, tgt, {});
  CHECK(SameParams(a.model.Parameters(), e.model.Parameters()));
}

TEST_CASE("trained SED: source accuracy, target agreement, loss decrease") {
  const SedRuns &r = SedRuns::Get();
  for (const SedTrainResult *res : {&r.none, &r.mlmmd}) {
    const double acc = FrameAccuracy(res->model, r.data.source);
    MESSAGE("source frame accuracy " << acc);
    CHECK(acc >= 0.90);
    const auto sm = Smooth(res->step_losses, 50);
    CHECK(sm.back() < sm.front());
    CHECK(res->log.size() == static_cast<std::size_t>(r.cfg.sed_train.epochs));
  }
  const double target_acc = FrameAccuracy(r.mlmmd.model, r.data.target_eval);
  MESSAGE("target frame agreement " << target_acc);
  CHECK(target_acc >= 0.80);
  // soft labels of the adapted SED agree with ground truth on the target
  Corpus tgt = r.data.target_eval;
  SoftLabelCorpus(r.mlmmd.model, tgt);
  std::size_t hit = 0, total = 0;
  for (const auto &u : tgt) {
    const auto am = ArgmaxRows(u.soft_labels->weights());
    for (std::size_t f = 0; f < am.size(); ++f, ++total) hit += am[f] == u.frame_labels.labels[f];
  }
  CHECK(static_cast<double>(hit) / total >= 0.80);
  CHECK(r.mlmmd.log.back().target_eder == doctest::Approx(EvaluateEder(r.mlmmd.model, r.data.target_eval).Rate()));
}

TEST_CASE("TTS step: zero weight leaves only the diffusion term") {
  const Fixture fx;
  TtsTrainConfig cfg;
  cfg.ce_max_t = 1.0;
  Rng rng(1);
  const TtsModel m = TtsModel::Init(cfg, fx.spec, 32, fx.schedule, rng);
  cfg.ce_weight = 0.0;
  for (int i = 0; i < 10; ++i) {
    Rng r(100 + i);
    const TtsLossBreakdown b = TtsTrainingStep(m, fx.Encoders(), fx.Batch(3), fx.schedule, cfg, r);
    CHECK(b.total == b.diff);
    CHECK(b.ce == 0.0);
  }
}

TEST_CASE("TTS step: term-wise flag soundness") {
  const Fixture fx;
  TtsTrainConfig cfg;
  cfg.ce_max_t = 1.0;
  Rng rng(2);
  const TtsModel m = TtsModel::Init(cfg, fx.spec, 32, fx.schedule, rng);
  Rng r1(7), r2(7);
  const TtsLossBreakdown on = TtsTrainingStep(m, fx.Encoders(), fx.Batch(3), fx.schedule, cfg, r1);
  CHECK(on.ce_samples == 3);
  CHECK(on.ce > 0.0);
  CHECK(on.total == doctest::Approx(on.diff + cfg.ce_weight * on.ce).epsilon(1e-14));
  cfg.use_frame_label_loss = false;
  const TtsLossBreakdown off = TtsTrainingStep(m, fx.Encoders(), fx.Batch(3), fx.schedule, cfg, r2);
  CHECK(off.ce == 0.0);
  CHECK(off.ce_samples == 0);
  CHECK(off.diff == on.diff);  // same draws, only the CE term removed
  CHECK(off.total == off.diff);

  // without SED conditioning the SED style features cannot reach Z_s
  TtsTrainConfig ns;
  ns.use_sed_conditioning = false;
  Rng r3(3);
  const TtsModel mn = TtsModel::Init(ns, fx.spec, 32, fx.schedule, r3);
  const FrameConditioning c1 = BuildConditioning(mn, fx.Encoders(), fx.corpus[0]);
  Rng r4(4);
  const ToySED other(ToySED::Config{}, r4);
  const FrameConditioning c2 = BuildConditioning(mn, {&fx.ser, &other}, fx.corpus[0]);
  CHECK(c1.zs.value() == c2.zs.value());
  const TtsModel mw = TtsModel::Init(TtsTrainConfig{}, fx.spec, 32, fx.schedule, r3);
  CHECK(BuildConditioning(mw, fx.Encoders(), fx.corpus[0]).zs.value() !=
        BuildConditioning(mw, {&fx.ser, &other}, fx.corpus[0]).zs.value());

  // the frame-label term needs soft labels
  Corpus bare = GenerateCorpus(fx.spec);
  Rng r5(5);
  std::vector<const SyntheticUtterance *> b = {&bare[0]};
  CHECK_THROWS_AS(TtsTrainingStep(m, fx.Encoders(), b, fx.schedule, TtsTrainConfig{}, r5), DomainError);
}

TEST_CASE("TTS step: gradients reach TTS modules only") {
  Fixture fx;
  TtsTrainConfig cfg;
  cfg.ce_max_t = 1.0;
  Rng rng(3);
  const TtsModel m = TtsModel::Init(cfg, fx.spec, 32, fx.schedule, rng);
  SetTrainable(fx.sed.Parameters(), false);
  SetTrainable(fx.ser.Parameters(), false);
  Rng r(9);
  TtsTrainingStep(m, fx.Encoders(), fx.Batch(2), fx.schedule, cfg, r);
  for (const auto &p : fx.sed.Parameters()) CHECK(p.var.grad().size() == 0);
  for (const auto &p : fx.ser.Parameters()) CHECK(p.var.grad().size() == 0);
  double norm = 0.0;
  for (const auto &p : m.Parameters())
    if (p.var.grad().size()) norm += p.var.grad().squaredNorm();
  CHECK(norm > 0.0);
  for (const char *name : {"attention.wq", "tts.content_table", "tts.mu_table", "score.w_out"}) {
    bool found = false;
    for (const auto &p : m.Parameters())
      if (p.name == name) found = p.var.grad().size() && p.var.grad().norm() > 0.0;
    CHECK_MESSAGE(found, name);
  }
}

TEST_CASE("TTS loss gradient check") {
  Fixture fx;
  SetTrainable(fx.sed.Parameters(), false);
  SetTrainable(fx.ser.Parameters(), false);
  TtsTrainConfig cfg;
  cfg.ce_max_t = 1.0;
  Rng rng(4);
  const TtsModel m = TtsModel::Init(cfg, fx.spec, 32, fx.schedule, rng);
  GradCheckOptions opts;
  opts.fraction = 0.05;
  const double err = GradCheck(m.Parameters(), [&] {
    // rebuild with a fixed stream so every evaluation sees the same draws
    Rng r(11);
    const ScoreNetFn net = [&](const ag::Var &xt, const ag::Var &mu, double t, const ag::Var &zs) {
      return m.score_net.Forward(xt, mu, t, zs);
    };
    const auto &u = fx.corpus[0];
    const FrameConditioning c = BuildConditioning(m, fx.Encoders(), u);
    const double t = 0.3;
    const ForwardDraw d = ForwardSample(u.mel, t, fx.schedule, r);
    const ag::Var score = net(ag::Constant(d.xt), c.mu, t, c.zs);
    const double lam = GetMarginalParams(fx.schedule, t).variance;
    const ag::Var diff = ag::Scale(ag::Mean(ag::Square(ag::Add(score, ag::Constant(d.eps / lam)))), lam);
    const ag::Var ce = SoftCrossEntropy(
        fx.sed.Forward(EstimateX0(ag::Constant(d.xt), score, t, fx.schedule)).frame_logits,
        u.soft_labels->weights());
    return ag::Add(diff, ce);
  }, opts);
  CHECK(err < 1e-4);
}

TEST_CASE("x0 estimate from the exact score") {
  const Fixture fx;
  Rng rng(5);
  const auto &u = fx.corpus[1];
  for (double t : {1e-3, 0.01, 0.05}) {
    const ForwardDraw d = ForwardSample(u.mel, t, fx.schedule, rng);
    const Matrix score = TrueScoreGaussian(d.xt, u.mel, t, fx.schedule);
    const ag::Var x0 = EstimateX0(ag::Constant(d.xt), ag::Constant(score), t, fx.schedule);
    CHECK((x0.value() - u.mel).cwiseAbs().maxCoeff() < 1e-6);
    const double ce_hat = SoftCrossEntropy(fx.sed.Forward(x0).frame_logits, u.soft_labels->weights()).scalar();
    const double ce_ref =
        SoftCrossEntropy(fx.sed.Forward(ag::Constant(u.mel)).frame_logits, u.soft_labels->weights()).scalar();
    CHECK(std::abs(ce_hat - ce_ref) < 1e-6);
  }
}

TEST_CASE("TTS breakdown stays finite and non-negative for 1000 steps") {
  const Fixture fx;
  TtsTrainConfig cfg;
  Rng rng(6);
  const TtsModel m = TtsModel::Init(cfg, fx.spec, 32, fx.schedule, rng);
  Rng r(7);
  int ce_seen = 0;
  for (int i = 0; i < 1000; ++i) {
    const TtsLossBreakdown b = TtsTrainingStep(m, fx.Encoders(), {&fx.corpus[i % 16]}, fx.schedule, cfg, r);
    CHECK_FALSE((!std::isfinite(b.total) || b.diff < 0.0 || b.ce < 0.0 || b.total < 0.0));
    ce_seen += b.ce_samples;
  }
  // CE applies only below ce_max_t
  CHECK(ce_seen > 300);
  CHECK(ce_seen < 500);
}

TEST_CASE("TTS training: loss decreases, seeded runs repeat, synthesis is deterministic") {
  const Fixture fx;
  TtsTrainConfig cfg;
  cfg.steps = 300;
  auto run = [&] {
    Rng rng(SubSeed(cfg.seed, 404));
    TtsModel m = TtsModel::Init(cfg, fx.spec, 32, fx.schedule, rng);
    TtsTrainResult r = TrainTts(m, fx.Encoders(), fx.corpus, fx.schedule, cfg);
    return std::make_pair(m, r);
  };
  const auto [m1, r1] = run();
  const auto [m2, r2] = run();
  std::vector<double> tot;
  for (const auto &s : r1.steps) tot.push_back(s.total);
  const auto sm = Smooth(tot, 50);
  CHECK(sm.back() < sm.front());
  REQUIRE(r1.steps.size() == r2.steps.size());
  for (std::size_t i = 0; i < r1.steps.size(); ++i) CHECK(r1.steps[i].total == r2.steps[i].total);
  CHECK(SameParams(m1.Parameters(), m2.Parameters()));

  SamplerConfig sc;
  sc.n_steps = 20;
  Rng a(42), b(42);
  const Matrix x = Synthesize(m1, fx.Encoders(), fx.corpus[2], fx.schedule, sc, a);
  const Matrix y = Synthesize(m1, fx.Encoders(), fx.corpus[2], fx.schedule, sc, b);
  CHECK(x.rows() == fx.corpus[2].num_frames());
  CHECK(x.cols() == fx.spec.n_mel_channels);
  CHECK(std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0);
  const EraSummary e1 = EvaluateEra(m1, fx.Encoders(), fx.sed, Corpus(fx.corpus.begin(), fx.corpus.begin() + 3),
                                    fx.schedule, sc, 9);
  const EraSummary e2 = EvaluateEra(m1, fx.Encoders(), fx.sed, Corpus(fx.corpus.begin(), fx.corpus.begin() + 3),
                                    fx.schedule, sc, 9);
  CHECK(e1.per_utterance == e2.per_utterance);
  CHECK(e1.per_utterance.size() == 3);
}

TEST_CASE("smoothing") {
  CHECK(Smooth({1, 2, 3, 4}, 2) == std::vector<double>{1, 1.5, 2.5, 3.5});
  CHECK(Smooth({}, 3).empty());
}

TEST_CASE("ablation report contract") {
  AblationReport r;
  r.sed_seeds = {1, 2, 3};
  r.tts_seeds = {1, 2};
  r.syntheses_per_seed = 50;
  r.eder = {{"none", {0.3, 0.3, 0.3}}, {"mmd", {0.2, 0.25, 0.1}}, {"mmmd", {0.15, 0.2, 0.2}},
            {"lmmd", {0.18, 0.3, 0.05}}, {"mlmmd", {0.1, 0.1, 0.08}}};
  r.era = {{"full", {0.7, 0.72}}, {"no_sed", {0.6, 0.65}}, {"no_frame_label", {0.5, 0.52}},
           {"no_cross_domain", {0.69, 0.7}}};
  // seed 3 breaks the ladder: mlmmd 0.08 > min(mmmd, lmmd) = 0.05
  CHECK(r.LadderOrderedSeeds() == 2);
  const std::string csv = r.EderCsv();
  CHECK(csv.find("mlmmd") != std::string::npos);
  CHECK(r.EraCsv().find("full") != std::string::npos);
  CHECK(r.TidyCsv().rfind("study,run,seed,metric,value\n", 0) == 0);
  CHECK(r.ToJson().find("\"syntheses_per_seed\": 50") != std::string::npos);
  CHECK(MeanOf({1, 2, 3}) == 2.0);
  CHECK(StdOf({1, 2, 3}) == doctest::Approx(1.0));
}
