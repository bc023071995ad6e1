// tests/test-experiment-config.cc

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

#include "edlab/experiment-config.h"
#include "edlab/experiments.h"

using namespace edlab;

namespace {

std::string PathOf(const std::string &json_text) {
  try {
    ParseExperimentConfig(json_text);
  } catch (const ConfigError &e) {
    return e.path();
  }
  return "<accepted>";
}

}  // namespace

TEST_CASE("empty document gives defaults") {
  const ExperimentConfig c = ParseExperimentConfig("{}");
  const ExperimentConfig d = DefaultExperimentConfig();
  CHECK(ExperimentConfigToJson(c) == ExperimentConfigToJson(d));
  CHECK(c.tts_train.ce_weight == 1.0);
  CHECK(c.sed_train.lambda_weight == 0.5);
  CHECK(c.schedule.beta0 == 0.05);
  CHECK(c.schedule.beta1 == 20.0);
  CHECK(c.sampler.n_steps == 100);
  CHECK(c.corpus.n_mel_channels == 16);
  CHECK(c.evaluation.sed_seeds == 5);
  CHECK(c.evaluation.tts_seeds == 3);
  CHECK(c.tts_train.n_syntheses >= 50);
}

TEST_CASE("resolved config round trips with every field materialized") {
  ExperimentConfig c;
  c.seed = 9;
  c.sed_train.seed = 9;
  c.tts_train.seed = 9;
  c.sed_train.adaptation_mode = AdaptationMode::kLmmd;
  c.kernel.mode = BandwidthMode::kFixed;
  c.tts_train.use_sed_conditioning = false;
  c.corpus.target_class_weights = {};
  const std::string j = ExperimentConfigToJson(c);
  const ExperimentConfig back = ParseExperimentConfig(j);
  CHECK(ExperimentConfigToJson(back) == j);
  CHECK(back.sed_train.adaptation_mode == AdaptationMode::kLmmd);
  CHECK(back.kernel.mode == BandwidthMode::kFixed);
  CHECK(back.corpus.target_class_weights.empty());
  for (const char *key : {"\"corpus\"", "\"domain_shift\"", "\"schedule\"", "\"sampler\"", "\"kernel\"",
                          "\"sed_train\"", "\"tts_train\"", "\"paths\"", "\"evaluation\"",
                          "\"ce_max_t\"", "\"target_class_weights\""})
    CHECK_MESSAGE(j.find(key) != std::string::npos, key);
}

TEST_CASE("training seeds follow the master seed unless set") {
  const ExperimentConfig a = ParseExperimentConfig(R"({"seed": 7})");
  CHECK(a.sed_train.seed == 7);
  CHECK(a.tts_train.seed == 7);
  const ExperimentConfig b = ParseExperimentConfig(R"({"seed": 7, "sed_train": {"seed": 3}})");
  CHECK(b.sed_train.seed == 3);
  CHECK(b.tts_train.seed == 7);
  ExperimentConfig c;
  OverrideSeed(c, 11);
  CHECK(c.seed == 11);
  CHECK(c.sed_train.seed == 11);
  CHECK(c.tts_train.seed == 11);
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK(PathOf(R"({"bogus": 1})") == "bogus");
  CHECK(PathOf(R"({"sed_train": {"epoch": 3}})") == "sed_train.epoch");
  CHECK(PathOf(R"({"corpus": {"domain_shift": {"gain": 1}}})") == "corpus.domain_shift.gain");
}

TEST_CASE("type and value errors carry the field path") {
  CHECK(PathOf(R"({"sed_train": {"epochs": "ten"}})") == "sed_train.epochs");
  CHECK(PathOf(R"({"sed_train": {"epochs": 2.5}})") == "sed_train.epochs");
  CHECK(PathOf(R"({"tts_train": {"use_sed_conditioning": 1}})") == "tts_train.use_sed_conditioning");
  CHECK(PathOf(R"({"seed": -1})") == "seed");
  CHECK(PathOf(R"({"sed_train": {"adaptation_mode": "dann"}})") == "sed_train.adaptation_mode");
  CHECK(PathOf(R"({"kernel": {"bandwidth_mode": "mean"}})") == "kernel.bandwidth_mode");
  CHECK(PathOf(R"({"kernel": {"bandwidths": []}})") == "kernel.bandwidths");
  CHECK(PathOf(R"({"sampler": {"n_steps": 0}})") == "sampler.n_steps");
  CHECK(PathOf(R"({"corpus": {"min_frames": 3}})") == "corpus.min_frames");
  CHECK(PathOf(R"({"schedule": {"beta0": 0}})") == "schedule");
  CHECK(PathOf(R"({"corpus": []})") == "corpus");
  CHECK(PathOf(R"({"evaluation": {"n_eval_target": 1000}})") == "evaluation.n_eval_target");
  CHECK(PathOf("{not json") == "<document>");
  CHECK(PathOf(R"({"tts_train": {"steps": 10, "ce_weight": 0.1}})") == "<accepted>");
}

TEST_CASE("data split holds out the trailing target utterances") {
  ExperimentConfig c;
  c.corpus.n_utterances = 40;
  c.evaluation.n_eval_target = 5;
  const ExperimentData d = PrepareData(c);
  CHECK(d.source.size() == 20);
  CHECK(d.target_train.size() == 15);
  CHECK(d.target_eval.size() == 5);
  CHECK(d.target_eval.back().id == 39);
  for (const auto &u : d.target_eval) CHECK(u.domain == Domain::kTarget);
}

TEST_CASE("ablation variants map onto the flags") {
  const auto &v = TtsAblationVariants();
  REQUIRE(v.size() == 4);
  CHECK(v[0].name == "full");
  TtsTrainConfig base;
  for (const auto &x : v) {
    const TtsTrainConfig c = ApplyVariant(base, x);
    CHECK(c.use_sed_conditioning == x.use_sed_conditioning);
    CHECK(c.use_frame_label_loss == x.use_frame_label_loss);
    CHECK(c.use_cross_domain_sed == x.use_cross_domain_sed);
    const int off = !x.use_sed_conditioning + !x.use_frame_label_loss + !x.use_cross_domain_sed;
    CHECK(off == (x.name == "full" ? 0 : 1));
  }
}

TEST_CASE("missing ablation checkpoints are all listed") {
  ExperimentConfig c;
  c.evaluation.sed_seeds = 2;
  const auto missing = MissingAblationCheckpoints(c, "/nonexistent-edlab");
  CHECK(missing.size() == 2 * 6);
  AblationOptions o;
  o.load_dir = "/nonexistent-edlab";
  try {
    RunAblationSuite(c, o);
    FAIL("expected MissingInputError");
  } catch (const MissingInputError &e) {
    const std::string what = e.what();
    CHECK(what.find("seed_1/ser.json") != std::string::npos);
    CHECK(what.find("seed_2/sed_mlmmd.json") != std::string::npos);
  }
}
