// src/diarization.cc

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

#include "edlab/diarization.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace edlab {

namespace {

constexpr double kTilingTolerance = 1e-6;

std::string FormatSeconds(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

}  // namespace

void SegmentList::Validate() const {
  if (segments.empty()) throw DomainError("segment list is empty");
  if (std::abs(segments.front().start) > kTilingTolerance)
    throw DomainError("segments must start at 0");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment &s = segments[i];
    if (!(s.start < s.end)) throw DomainError("segment " + std::to_string(i) + " has start >= end");
    if (i + 1 < segments.size() && std::abs(s.end - segments[i + 1].start) > kTilingTolerance)
      throw DomainError("segments " + std::to_string(i) + " and " + std::to_string(i + 1) +
                        " leave a gap or overlap");
  }
  if (std::abs(segments.back().end - total_duration) > kTilingTolerance)
    throw DomainError("segments do not end at total_duration");
}

void FrameLabelSequence::Validate() const {
  if (labels.empty()) throw DomainError("frame label sequence is empty");
  if (!(frame_hop > 0.0)) throw DomainError("frame hop must be positive");
}

SegmentList FramesToSegments(const FrameLabelSequence &frames) {
  frames.Validate();
  SegmentList out;
  const auto n = frames.labels.size();
  std::size_t run_start = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || frames.labels[i] != frames.labels[run_start]) {
      out.segments.push_back({static_cast<double>(run_start) * frames.frame_hop,
                              static_cast<double>(i) * frames.frame_hop,
                              frames.labels[run_start]});
      run_start = i;
    }
  }
  out.total_duration = frames.duration();
  return out;
}

FrameLabelSequence SegmentsToFrames(const SegmentList &segments, double frame_hop) {
  segments.Validate();
  if (!(frame_hop > 0.0)) throw DomainError("frame hop must be positive");
  const auto n = static_cast<std::size_t>(std::llround(segments.total_duration / frame_hop));
  FrameLabelSequence out;
  out.frame_hop = frame_hop;
  out.labels.resize(std::max<std::size_t>(n, 1));
  std::size_t k = 0;
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const double center = (static_cast<double>(i) + 0.5) * frame_hop;
    while (k + 1 < segments.segments.size() && center >= segments.segments[k].end) ++k;
    out.labels[i] = segments.segments[k].label;
  }
  return out;
}

EderBreakdown ComputeEderBreakdown(const SegmentList &reference, const SegmentList &hypothesis) {
  reference.Validate();
  hypothesis.Validate();
  if (std::abs(reference.total_duration - hypothesis.total_duration) > kTilingTolerance)
    throw DomainError("EDER: reference and hypothesis durations differ (" +
                      std::to_string(reference.total_duration) + " vs " +
                      std::to_string(hypothesis.total_duration) + ")");
  EderBreakdown out;
  out.total_duration = reference.total_duration;
  const auto &ref = reference.segments;
  const auto &hyp = hypothesis.segments;
  std::size_t i = 0, j = 0;
  double cursor = 0.0;
  // Walk the merged breakpoints; each elementary piece has one label per side.
  while (i < ref.size() && j < hyp.size()) {
    const double next = std::min(ref[i].end, hyp[j].end);
    const double len = next - cursor;
    if (len > 0.0) {
      const int r = ref[i].label, h = hyp[j].label;
      if (r == kNeutralLabel && h != kNeutralLabel) {
        out.false_alarm += len;
      } else if (r != kNeutralLabel && h == kNeutralLabel) {
        out.missed += len;
      } else if (r != kNeutralLabel && r != h) {
        out.confusion += len;
      }
    }
    cursor = std::max(cursor, next);
    if (ref[i].end <= next) ++i;
    if (hyp[j].end <= next) ++j;
  }
  return out;
}

double Eder(const SegmentList &reference, const SegmentList &hypothesis) {
  return ComputeEderBreakdown(reference, hypothesis).Rate();
}

double Era(const FrameLabelSequence &reference, const FrameLabelSequence &reclassified) {
  reference.Validate();
  if (reference.labels.size() != reclassified.labels.size())
    throw DomainError("ERA: sequences differ in length (" +
                      std::to_string(reference.labels.size()) + " vs " +
                      std::to_string(reclassified.labels.size()) + ")");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < reference.labels.size(); ++i)
    hits += reference.labels[i] == reclassified.labels[i];
  return static_cast<double>(hits) / static_cast<double>(reference.labels.size());
}

void WriteSegmentsCsv(std::ostream &os, const SegmentList &segments) {
  os << "start,end,label\n";
  for (const auto &s : segments.segments)
    os << FormatSeconds(s.start) << ',' << FormatSeconds(s.end) << ',' << s.label << '\n';
}

SegmentList ReadSegmentsCsv(std::istream &is) {
  SegmentList out;
  std::string line;
  bool header = true;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("start", 0) == 0) continue;
    }
    std::istringstream row(line);
    Segment s;
    char c1 = 0, c2 = 0;
    if (!(row >> s.start >> c1 >> s.end >> c2 >> s.label) || c1 != ',' || c2 != ',')
      throw DomainError("segment CSV line " + std::to_string(line_no) + " is malformed");
    out.segments.push_back(s);
  }
  if (out.segments.empty()) throw DomainError("segment CSV has no rows");
  out.total_duration = out.segments.back().end;
  out.Validate();
  return out;
}

std::string SegmentsToJson(const SegmentList &segments) {
  nlohmann::ordered_json j;
  j["total_duration"] = segments.total_duration;
  j["segments"] = nlohmann::ordered_json::array();
  for (const auto &s : segments.segments)
    j["segments"].push_back({{"start", s.start}, {"end", s.end}, {"label", s.label}});
  return j.dump(2);
}

SegmentList SegmentsFromJson(const std::string &text) {
  const auto j = nlohmann::json::parse(text);
  SegmentList out;
  out.total_duration = j.at("total_duration").get<double>();
  for (const auto &s : j.at("segments"))
    out.segments.push_back(
        {s.at("start").get<double>(), s.at("end").get<double>(), s.at("label").get<int>()});
  out.Validate();
  return out;
}

std::string FramesToJson(const FrameLabelSequence &frames) {
  nlohmann::ordered_json j;
  j["frame_hop"] = frames.frame_hop;
  j["labels"] = frames.labels;
  return j.dump();
}

FrameLabelSequence FramesFromJson(const std::string &text) {
  const auto j = nlohmann::json::parse(text);
  FrameLabelSequence out;
  out.frame_hop = j.at("frame_hop").get<double>();
  out.labels = j.at("labels").get<std::vector<int>>();
  out.Validate();
  return out;
}

}  // namespace edlab
