// src/experiment-config.cc

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

#include "edlab/experiment-config.h"

#include <cmath>
#include <set>
#include <type_traits>

#include "json.hpp"

namespace edlab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads fields from one JSON object, remembering which keys were consumed so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json *obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (obj_ != nullptr && !obj_->is_object()) throw ConfigError(path_, "must be an object");
  }

  template <class T>
  void Get(const char *key, T &out) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) return;
    const json &v = obj_->at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(Path(key), "expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(Path(key), "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned())
            throw ConfigError(Path(key), "expected a non-negative integer");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(Path(key), "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(Path(key), "expected a string");
      }
      out = v.get<T>();
    } catch (const json::exception &e) {
      throw ConfigError(Path(key), e.what());
    }
  }

  bool Has(const char *key) const { return obj_ != nullptr && obj_->contains(key); }

  Section Child(const char *key) {
    seen_.insert(key);
    return Section(Has(key) ? &obj_->at(key) : nullptr, Path(key));
  }

  void RejectUnknown() const {
    if (obj_ == nullptr) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(Path(it.key().c_str()), "unknown key");
  }

  std::string Path(const char *key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json *obj_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

void ExperimentConfig::Validate() const {
  corpus.Validate();
  try {
    schedule.Validate();
  } catch (const DomainError &e) {
    throw ConfigError("schedule", e.what());
  }
  if (sampler.n_steps < 1) throw ConfigError("sampler.n_steps", "must be >= 1");
  if (kernel.bandwidths.empty()) throw ConfigError("kernel.bandwidths", "must be non-empty");
  for (double b : kernel.bandwidths)
    if (!(b > 0.0)) throw ConfigError("kernel.bandwidths", "entries must be positive");
  sed_train.Validate();
  tts_train.Validate();
  if (evaluation.n_eval_target < 1) throw ConfigError("evaluation.n_eval_target", "must be >= 1");
  if (evaluation.sed_seeds < 1) throw ConfigError("evaluation.sed_seeds", "must be >= 1");
  if (evaluation.tts_seeds < 1) throw ConfigError("evaluation.tts_seeds", "must be >= 1");
  const int n_target =
      static_cast<int>(std::lround(corpus.target_fraction * corpus.n_utterances));
  if (n_target <= evaluation.n_eval_target)
    throw ConfigError("evaluation.n_eval_target",
                      "leaves no target utterances for training (target has " +
                          std::to_string(n_target) + ")");
  if (n_target == corpus.n_utterances)
    throw ConfigError("corpus.target_fraction", "leaves no source utterances");
}

ExperimentConfig DefaultExperimentConfig() { return {}; }

ExperimentConfig ParseExperimentConfig(const std::string &json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error &e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg = DefaultExperimentConfig();
  Section top(&root, "");
  top.Get("seed", cfg.seed);

  {
    Section s = top.Child("corpus");
    CorpusSpec &c = cfg.corpus;
    s.Get("n_utterances", c.n_utterances);
    s.Get("n_mel_channels", c.n_mel_channels);
    s.Get("frame_hop", c.frame_hop);
    s.Get("min_frames", c.min_frames);
    s.Get("max_frames", c.max_frames);
    s.Get("n_classes", c.n_classes);
    s.Get("n_speakers", c.n_speakers);
    s.Get("n_phonemes", c.n_phonemes);
    s.Get("max_segments", c.max_segments);
    s.Get("target_fraction", c.target_fraction);
    s.Get("template_scale", c.template_scale);
    s.Get("modulation_depth", c.modulation_depth);
    s.Get("phoneme_scale", c.phoneme_scale);
    s.Get("speaker_scale", c.speaker_scale);
    s.Get("noise_std", c.noise_std);
    s.Get("target_class_weights", c.target_class_weights);
    s.Get("seed", c.seed);
    Section d = s.Child("domain_shift");
    d.Get("gain_min", c.domain_shift.gain_min);
    d.Get("gain_max", c.domain_shift.gain_max);
    d.Get("bias_max", c.domain_shift.bias_max);
    d.Get("noise_std", c.domain_shift.noise_std);
    d.RejectUnknown();
    s.RejectUnknown();
  }
  {
    Section s = top.Child("schedule");
    s.Get("beta0", cfg.schedule.beta0);
    s.Get("beta1", cfg.schedule.beta1);
    s.RejectUnknown();
  }
  {
    Section s = top.Child("sampler");
    s.Get("n_steps", cfg.sampler.n_steps);
    s.Get("stochastic", cfg.sampler.stochastic);
    s.RejectUnknown();
  }
  {
    Section s = top.Child("kernel");
    s.Get("bandwidths", cfg.kernel.bandwidths);
    std::string mode = cfg.kernel.mode == BandwidthMode::kFixed ? "fixed" : "median";
    s.Get("bandwidth_mode", mode);
    if (mode == "fixed") {
      cfg.kernel.mode = BandwidthMode::kFixed;
    } else if (mode == "median") {
      cfg.kernel.mode = BandwidthMode::kMedianHeuristic;
    } else {
      throw ConfigError("kernel.bandwidth_mode", "must be \"fixed\" or \"median\"");
    }
    s.RejectUnknown();
  }
  bool sed_seed_set = false, tts_seed_set = false;
  {
    Section s = top.Child("sed_train");
    SedTrainConfig &c = cfg.sed_train;
    s.Get("epochs", c.epochs);
    s.Get("batch_size", c.batch_size);
    s.Get("steps_per_epoch", c.steps_per_epoch);
    s.Get("lambda_weight", c.lambda_weight);
    std::string mode = AdaptationModeName(c.adaptation_mode);
    s.Get("adaptation_mode", mode);
    try {
      c.adaptation_mode = ParseAdaptationMode(mode);
    } catch (const DomainError &e) {
      throw ConfigError("sed_train.adaptation_mode", e.what());
    }
    s.Get("learning_rate", c.learning_rate);
    s.Get("momentum", c.momentum);
    s.Get("max_grad_norm", c.max_grad_norm);
    s.Get("pool_window", c.pool_window);
    s.Get("ser_epochs", c.ser_epochs);
    s.Get("ser_hidden", c.ser_hidden);
    s.Get("conv_channels", c.conv_channels);
    s.Get("n_conv_layers", c.n_conv_layers);
    s.Get("kernel_size", c.kernel_size);
    s.Get("style_dim", c.style_dim);
    sed_seed_set = s.Has("seed");
    s.Get("seed", c.seed);
    s.RejectUnknown();
  }
  {
    Section s = top.Child("tts_train");
    TtsTrainConfig &c = cfg.tts_train;
    s.Get("steps", c.steps);
    s.Get("batch_size", c.batch_size);
    s.Get("ce_weight", c.ce_weight);
    s.Get("use_sed_conditioning", c.use_sed_conditioning);
    s.Get("use_frame_label_loss", c.use_frame_label_loss);
    s.Get("use_cross_domain_sed", c.use_cross_domain_sed);
    s.Get("learning_rate", c.learning_rate);
    s.Get("momentum", c.momentum);
    s.Get("max_grad_norm", c.max_grad_norm);
    s.Get("t_min", c.t_min);
    s.Get("ce_max_t", c.ce_max_t);
    s.Get("positional_encoding", c.positional_encoding);
    s.Get("n_heads", c.n_heads);
    s.Get("hidden", c.hidden);
    s.Get("time_dim", c.time_dim);
    s.Get("n_syntheses", c.n_syntheses);
    tts_seed_set = s.Has("seed");
    s.Get("seed", c.seed);
    s.RejectUnknown();
  }
  {
    Section s = top.Child("paths");
    s.Get("workdir", cfg.paths.workdir);
    s.Get("checkpoint_dir", cfg.paths.checkpoint_dir);
    s.RejectUnknown();
  }
  {
    Section s = top.Child("evaluation");
    s.Get("n_eval_target", cfg.evaluation.n_eval_target);
    s.Get("sed_seeds", cfg.evaluation.sed_seeds);
    s.Get("tts_seeds", cfg.evaluation.tts_seeds);
    s.RejectUnknown();
  }
  top.RejectUnknown();
  if (!sed_seed_set) cfg.sed_train.seed = cfg.seed;
  if (!tts_seed_set) cfg.tts_train.seed = cfg.seed;
  cfg.Validate();
  return cfg;
}

std::string ExperimentConfigToJson(const ExperimentConfig &cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["corpus"] = ordered_json::parse(CorpusSpecToJson(cfg.corpus));
  j["schedule"] = {{"beta0", cfg.schedule.beta0}, {"beta1", cfg.schedule.beta1}};
  j["sampler"] = {{"n_steps", cfg.sampler.n_steps}, {"stochastic", cfg.sampler.stochastic}};
  j["kernel"] = {{"bandwidths", cfg.kernel.bandwidths},
                 {"bandwidth_mode",
                  cfg.kernel.mode == BandwidthMode::kFixed ? "fixed" : "median"}};
  const SedTrainConfig &s = cfg.sed_train;
  j["sed_train"] = {{"epochs", s.epochs},
                    {"batch_size", s.batch_size},
                    {"steps_per_epoch", s.steps_per_epoch},
                    {"lambda_weight", s.lambda_weight},
                    {"adaptation_mode", AdaptationModeName(s.adaptation_mode)},
                    {"learning_rate", s.learning_rate},
                    {"momentum", s.momentum},
                    {"max_grad_norm", s.max_grad_norm},
                    {"pool_window", s.pool_window},
                    {"ser_epochs", s.ser_epochs},
                    {"ser_hidden", s.ser_hidden},
                    {"conv_channels", s.conv_channels},
                    {"n_conv_layers", s.n_conv_layers},
                    {"kernel_size", s.kernel_size},
                    {"style_dim", s.style_dim},
                    {"seed", s.seed}};
  const TtsTrainConfig &t = cfg.tts_train;
  j["tts_train"] = {{"steps", t.steps},
                    {"batch_size", t.batch_size},
                    {"ce_weight", t.ce_weight},
                    {"use_sed_conditioning", t.use_sed_conditioning},
                    {"use_frame_label_loss", t.use_frame_label_loss},
                    {"use_cross_domain_sed", t.use_cross_domain_sed},
                    {"learning_rate", t.learning_rate},
                    {"momentum", t.momentum},
                    {"max_grad_norm", t.max_grad_norm},
                    {"t_min", t.t_min},
                    {"ce_max_t", t.ce_max_t},
                    {"positional_encoding", t.positional_encoding},
                    {"n_heads", t.n_heads},
                    {"hidden", t.hidden},
                    {"time_dim", t.time_dim},
                    {"n_syntheses", t.n_syntheses},
                    {"seed", t.seed}};
  j["paths"] = {{"workdir", cfg.paths.workdir}, {"checkpoint_dir", cfg.paths.checkpoint_dir}};
  j["evaluation"] = {{"n_eval_target", cfg.evaluation.n_eval_target},
                     {"sed_seeds", cfg.evaluation.sed_seeds},
                     {"tts_seeds", cfg.evaluation.tts_seeds}};
  return j.dump(2);
}

void OverrideSeed(ExperimentConfig &cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.sed_train.seed = seed;
  cfg.tts_train.seed = seed;
}

}  // namespace edlab
