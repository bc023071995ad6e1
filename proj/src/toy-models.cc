// src/toy-models.cc

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

#include "edlab/toy-models.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace edlab {

using nlohmann::json;
using nlohmann::ordered_json;

// ToySER

ToySER::ToySER(const Config &cfg, Rng &rng) : cfg_(cfg) {
  w_in_ = ag::Param(UniformInit(cfg.n_mel, cfg.hidden, cfg.n_mel, rng));
  b_in_ = ag::Param(UniformInit(1, cfg.hidden, cfg.n_mel, rng));
  w_cls_ = ag::Param(UniformInit(cfg.hidden, cfg.n_classes, cfg.hidden, rng));
  b_cls_ = ag::Param(UniformInit(1, cfg.n_classes, cfg.hidden, rng));
  w_emb_ = ag::Param(UniformInit(cfg.hidden, cfg.emb_dim, cfg.hidden, rng));
  b_emb_ = ag::Param(UniformInit(1, cfg.emb_dim, cfg.hidden, rng));
}

ToySER::Output ToySER::Forward(const ag::Var &mel) const {
  if (mel.rows() < 1) throw ShapeError("SER input has no frames");
  return ForwardPooled(mel, {{0, mel.rows()}});
}

ToySER::Output ToySER::ForwardPooled(const ag::Var &mel,
                                     std::vector<std::pair<Index, Index>> groups) const {
  if (mel.rows() < 1) throw ShapeError("SER input has no frames");
  if (mel.cols() != cfg_.n_mel) throw ShapeError("SER input width differs from n_mel");
  ag::Var h = ag::Tanh(ag::AddRow(ag::MatMul(mel, w_in_), b_in_));
  ag::Var pooled = ag::SegmentMeanRows(h, std::move(groups));
  return {ag::AddRow(ag::MatMul(pooled, w_cls_), b_cls_),
          ag::AddRow(ag::MatMul(pooled, w_emb_), b_emb_)};
}

std::vector<NamedParam> ToySER::Parameters() const {
  return {{"ser.w_in", w_in_},   {"ser.b_in", b_in_},   {"ser.w_cls", w_cls_},
          {"ser.b_cls", b_cls_}, {"ser.w_emb", w_emb_}, {"ser.b_emb", b_emb_}};
}

// ToySED

ToySED::ToySED(const Config &cfg, Rng &rng) : cfg_(cfg) {
  if (cfg.kernel_size < 1 || cfg.kernel_size % 2 == 0)
    throw ShapeError("SED kernel size must be odd");
  if (cfg.n_conv_layers < 1) throw ShapeError("SED needs at least one conv layer");
  int in = cfg.n_mel;
  for (int l = 0; l < cfg.n_conv_layers; ++l) {
    const int fan_in = in * cfg.kernel_size;
    std::vector<ag::Var> taps;
    for (int k = 0; k < cfg.kernel_size; ++k)
      taps.push_back(ag::Param(UniformInit(in, cfg.conv_channels, fan_in, rng)));
    conv_w_.push_back(std::move(taps));
    conv_b_.push_back(ag::Param(UniformInit(1, cfg.conv_channels, fan_in, rng)));
    in = cfg.conv_channels;
  }
  w_bottleneck_ = ag::Param(UniformInit(in, cfg.bottleneck_dim, in, rng));
  b_bottleneck_ = ag::Param(UniformInit(1, cfg.bottleneck_dim, in, rng));
  w_head_ = ag::Param(UniformInit(cfg.bottleneck_dim, cfg.n_classes, cfg.bottleneck_dim, rng));
  b_head_ = ag::Param(UniformInit(1, cfg.n_classes, cfg.bottleneck_dim, rng));
}

ToySED::Output ToySED::Forward(const ag::Var &mel) const {
  if (mel.rows() < 1) throw ShapeError("SED input has no frames");
  if (mel.cols() != cfg_.n_mel) throw ShapeError("SED input width differs from n_mel");
  const Index n = mel.rows();
  const int half = cfg_.kernel_size / 2;
  // Edge-replicated taps keep constant inputs constant along time.
  std::vector<std::vector<Index>> tap_index(cfg_.kernel_size);
  for (int k = 0; k < cfg_.kernel_size; ++k) {
    tap_index[k].resize(n);
    for (Index i = 0; i < n; ++i) tap_index[k][i] = std::clamp<Index>(i + k - half, 0, n - 1);
  }
  Output out;
  ag::Var x = mel;
  for (int l = 0; l < cfg_.n_conv_layers; ++l) {
    ag::Var acc;
    for (int k = 0; k < cfg_.kernel_size; ++k) {
      ag::Var shifted = (k == half) ? x : ag::GatherRows(x, tap_index[k]);
      ag::Var term = ag::MatMul(shifted, conv_w_[l][k]);
      acc = acc.defined() ? ag::Add(acc, term) : term;
    }
    x = ag::Tanh(ag::AddRow(acc, conv_b_[l]));
    out.layers.push_back(x);
  }
  out.frame_style = ag::Tanh(ag::AddRow(ag::MatMul(x, w_bottleneck_), b_bottleneck_));
  out.layers.push_back(out.frame_style);
  out.frame_logits = ag::AddRow(ag::MatMul(out.frame_style, w_head_), b_head_);
  return out;
}

std::vector<NamedParam> ToySED::Parameters() const {
  std::vector<NamedParam> p;
  for (std::size_t l = 0; l < conv_w_.size(); ++l) {
    for (std::size_t k = 0; k < conv_w_[l].size(); ++k)
      p.push_back({"sed.conv" + std::to_string(l) + ".w" + std::to_string(k), conv_w_[l][k]});
    p.push_back({"sed.conv" + std::to_string(l) + ".b", conv_b_[l]});
  }
  p.push_back({"sed.w_bottleneck", w_bottleneck_});
  p.push_back({"sed.b_bottleneck", b_bottleneck_});
  p.push_back({"sed.w_head", w_head_});
  p.push_back({"sed.b_head", b_head_});
  return p;
}

// ToyScoreNet

RowVector TimeEmbedding(double t, int dim) {
  RowVector e(dim);
  const int half = dim / 2;
  for (int i = 0; i < dim; ++i) {
    const int k = i % std::max(half, 1);
    const double freq = std::pow(100.0, static_cast<double>(k) / std::max(half - 1, 1));
    e(i) = (i < half) ? std::sin(freq * t) : std::cos(freq * t);
  }
  return e;
}

ToyScoreNet::ToyScoreNet(const Config &cfg, const NoiseSchedule &schedule, Rng &rng)
    : cfg_(cfg), schedule_(schedule) {
  schedule_.Validate();
  const int in = 2 * cfg.n_mel + cfg.time_dim + cfg.cond_dim;
  w_in_ = ag::Param(UniformInit(in, cfg.hidden, in, rng));
  b_in_ = ag::Param(UniformInit(1, cfg.hidden, in, rng));
  w_res_ = ag::Param(UniformInit(cfg.hidden, cfg.hidden, cfg.hidden, rng));
  b_res_ = ag::Param(UniformInit(1, cfg.hidden, cfg.hidden, rng));
  if (cfg.zero_head) {
    w_out_ = ag::Param(Matrix::Zero(cfg.hidden, cfg.n_mel));
    b_out_ = ag::Param(Matrix::Zero(1, cfg.n_mel));
  } else {
    w_out_ = ag::Param(UniformInit(cfg.hidden, cfg.n_mel, cfg.hidden, rng));
    b_out_ = ag::Param(UniformInit(1, cfg.n_mel, cfg.hidden, rng));
  }
}

ag::Var ToyScoreNet::Forward(const ag::Var &xt, const ag::Var &mu, double t,
                             const ag::Var &zs) const {
  const Index n = xt.rows();
  if (xt.cols() != cfg_.n_mel || mu.rows() != n || mu.cols() != cfg_.n_mel ||
      zs.rows() != n || zs.cols() != cfg_.cond_dim)
    throw ShapeError("score network inputs have inconsistent shapes");
  if (!xt.value().allFinite() || !mu.value().allFinite() || !zs.value().allFinite() ||
      !std::isfinite(t))
    throw NumericError("score network received a non-finite input");
  const RowVector temb = TimeEmbedding(t, cfg_.time_dim);
  ag::Var time_features = ag::Constant(temb.replicate(n, 1));
  const std::vector<ag::Var> parts = {xt, time_features, mu, zs};
  ag::Var h = ag::Tanh(ag::AddRow(ag::MatMul(ag::ConcatCols(parts), w_in_), b_in_));
  h = ag::Add(h, ag::Tanh(ag::AddRow(ag::MatMul(h, w_res_), b_res_)));
  ag::Var raw = ag::AddRow(ag::MatMul(h, w_out_), b_out_);
  const double sigma = std::sqrt(std::max(GetMarginalParams(schedule_, t).variance,
                                          kMinTrainingVariance));
  return ag::Scale(raw, 1.0 / sigma);
}

Matrix ToyScoreNet::Evaluate(const Matrix &xt, const Matrix &mu, double t,
                             const Matrix &zs) const {
  return Forward(ag::Constant(xt), ag::Constant(mu), t, ag::Constant(zs)).value();
}

std::vector<NamedParam> ToyScoreNet::Parameters() const {
  return {{"score.w_in", w_in_},   {"score.b_in", b_in_},   {"score.w_res", w_res_},
          {"score.b_res", b_res_}, {"score.w_out", w_out_}, {"score.b_out", b_out_}};
}

// Losses and helpers

ag::Var SoftCrossEntropy(const ag::Var &logits, const Matrix &targets) {
  if (targets.rows() != logits.rows() || targets.cols() != logits.cols())
    throw ShapeError("cross entropy targets differ in shape from logits");
  ag::Var ll = ag::Mul(ag::RowLogSoftmax(logits), ag::Constant(targets));
  return ag::Scale(ag::Sum(ll), -1.0 / static_cast<double>(logits.rows()));
}

Matrix Softmax(const Matrix &logits) { return ag::RowSoftmax(ag::Constant(logits)).value(); }

std::vector<int> ArgmaxRows(const Matrix &m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    Index arg = 0;
    m.row(i).maxCoeff(&arg);
    out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return out;
}

double GradCheck(const std::vector<NamedParam> &params, const std::function<ag::Var()> &loss_fn,
                 const GradCheckOptions &opts) {
  ZeroGrads(params);
  ag::Var loss = loss_fn();
  if (!std::isfinite(loss.scalar())) throw NumericError("grad check: loss is not finite");
  ag::Backward(loss);
  std::vector<Matrix> analytic;
  for (const auto &p : params)
    analytic.push_back(p.var.grad().size() ? p.var.grad()
                                           : Matrix::Zero(p.var.rows(), p.var.cols()));

  // Flatten (param, entry) pairs and pick a seeded subsample.
  std::vector<std::pair<std::size_t, Index>> entries;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (Index k = 0; k < params[i].var.value().size(); ++k) entries.emplace_back(i, k);
  Rng rng(opts.seed);
  std::shuffle(entries.begin(), entries.end(), rng);
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(opts.fraction * static_cast<double>(entries.size()))));
  entries.resize(std::min(keep, entries.size()));

  double worst = 0.0;
  for (const auto &[i, k] : entries) {
    double &slot = params[i].var.node()->value.data()[k];
    const double saved = slot;
    slot = saved + opts.step;
    const double up = loss_fn().scalar();
    slot = saved - opts.step;
    const double down = loss_fn().scalar();
    slot = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("grad check: perturbed loss is not finite");
    const double numeric = (up - down) / (2.0 * opts.step);
    const double a = analytic[i].data()[k];
    const double denom = std::max({std::abs(a), std::abs(numeric), opts.abs_floor});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  ZeroGrads(params);
  return worst;
}

// Checkpoints

void SaveCheckpoint(const std::string &path, const std::string &kind,
                    const std::string &config_json, const std::vector<NamedParam> &params) {
  ordered_json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["model"] = kind;
  j["config"] = ordered_json::parse(config_json);
  j["params"] = ordered_json::array();
  for (const auto &p : params) {
    const Matrix &v = p.var.value();
    j["params"].push_back({{"name", p.name},
                           {"rows", v.rows()},
                           {"cols", v.cols()},
                           {"data", std::vector<double>(v.data(), v.data() + v.size())}});
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw MissingInputError("cannot write checkpoint " + path);
  os << j.dump() << '\n';
}

namespace {

json ReadJsonFile(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingInputError("checkpoint not found: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return json::parse(ss.str());
}

// Config parsing differs per kind, so the kind is checked up front.
std::string KindCheckedConfig(const std::string &path, const std::string &kind) {
  const json j = ReadJsonFile(path);
  const std::string got = j.value("model", std::string("?"));
  if (got != kind) throw ShapeError(path + ": holds a " + got + ", expected " + kind);
  return j.at("config").dump();
}

}  // namespace

void LoadCheckpoint(const std::string &path, const std::string &kind,
                    const std::vector<NamedParam> &params) {
  const json j = ReadJsonFile(path);
  if (j.at("format_version").get<int>() != kCheckpointFormatVersion)
    throw ShapeError(path + ": unsupported checkpoint format version");
  if (j.at("model").get<std::string>() != kind)
    throw ShapeError(path + ": holds a " + j.at("model").get<std::string>() + ", expected " + kind);
  const auto &stored = j.at("params");
  if (stored.size() != params.size()) throw ShapeError(path + ": parameter count differs");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto &s = stored[i];
    Matrix &dst = params[i].var.node()->value;
    if (s.at("name").get<std::string>() != params[i].name ||
        s.at("rows").get<Index>() != dst.rows() || s.at("cols").get<Index>() != dst.cols())
      throw ShapeError(path + ": parameter " + params[i].name + " has a different name or shape");
    const auto data = s.at("data").get<std::vector<double>>();
    if (static_cast<Index>(data.size()) != dst.size())
      throw ShapeError(path + ": parameter " + params[i].name + " has the wrong element count");
    std::copy(data.begin(), data.end(), dst.data());
  }
}

std::string ReadCheckpointConfig(const std::string &path) {
  return ReadJsonFile(path).at("config").dump();
}

void SaveModel(const std::string &path, const ToySER &m) {
  SaveCheckpoint(path, "ser", ToJson(m.config()), m.Parameters());
}

void SaveModel(const std::string &path, const ToySED &m) {
  SaveCheckpoint(path, "sed", ToJson(m.config()), m.Parameters());
}

ToySER LoadSer(const std::string &path) {
  Rng rng(0);
  ToySER m(SerConfigFromJson(KindCheckedConfig(path, "ser")), rng);
  LoadCheckpoint(path, "ser", m.Parameters());
  return m;
}

ToySED LoadSed(const std::string &path) {
  Rng rng(0);
  ToySED m(SedConfigFromJson(KindCheckedConfig(path, "sed")), rng);
  LoadCheckpoint(path, "sed", m.Parameters());
  return m;
}

std::string ToJson(const ToySER::Config &c) {
  ordered_json j = {{"n_mel", c.n_mel},
                    {"hidden", c.hidden},
                    {"n_classes", c.n_classes},
                    {"emb_dim", c.emb_dim}};
  return j.dump();
}

std::string ToJson(const ToySED::Config &c) {
  ordered_json j = {{"n_mel", c.n_mel},
                    {"conv_channels", c.conv_channels},
                    {"n_conv_layers", c.n_conv_layers},
                    {"kernel_size", c.kernel_size},
                    {"bottleneck_dim", c.bottleneck_dim},
                    {"n_classes", c.n_classes}};
  return j.dump();
}

std::string ToJson(const ToyScoreNet::Config &c) {
  ordered_json j = {{"n_mel", c.n_mel},
                    {"cond_dim", c.cond_dim},
                    {"time_dim", c.time_dim},
                    {"hidden", c.hidden},
                    {"zero_head", c.zero_head}};
  return j.dump();
}

ToySER::Config SerConfigFromJson(const std::string &s) {
  const json j = json::parse(s);
  return {j.at("n_mel").get<int>(), j.at("hidden").get<int>(), j.at("n_classes").get<int>(),
          j.at("emb_dim").get<int>()};
}

ToySED::Config SedConfigFromJson(const std::string &s) {
  const json j = json::parse(s);
  return {j.at("n_mel").get<int>(),         j.at("conv_channels").get<int>(),
          j.at("n_conv_layers").get<int>(), j.at("kernel_size").get<int>(),
          j.at("bottleneck_dim").get<int>(), j.at("n_classes").get<int>()};
}

ToyScoreNet::Config ScoreNetConfigFromJson(const std::string &s) {
  const json j = json::parse(s);
  return {j.at("n_mel").get<int>(), j.at("cond_dim").get<int>(), j.at("time_dim").get<int>(),
          j.at("hidden").get<int>(), j.at("zero_head").get<bool>()};
}

}  // namespace edlab
