// include/edlab/diarization.h

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

#ifndef EDLAB_DIARIZATION_H_
#define EDLAB_DIARIZATION_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "edlab/types.h"

namespace edlab {

inline constexpr int kNeutralLabel = 0;

struct Segment {
  double start = 0.0;
  double end = 0.0;
  int label = kNeutralLabel;

  bool operator==(const Segment &) const = default;
};

// Sorted, non-overlapping segments tiling [0, total_duration]; neutral time
// is an explicit segment.
struct SegmentList {
  std::vector<Segment> segments;
  double total_duration = 0.0;

  // Throws DomainError if the segments do not tile the span (to 1e-6 s).
  void Validate() const;
};

struct FrameLabelSequence {
  std::vector<int> labels;
  double frame_hop = 0.01;

  void Validate() const;
  double duration() const { return static_cast<double>(labels.size()) * frame_hop; }
};

// Merges maximal runs of equal labels. Frame i covers [i*hop, (i+1)*hop).
SegmentList FramesToSegments(const FrameLabelSequence &frames);
// Labels each frame by the segment containing its center.
FrameLabelSequence SegmentsToFrames(const SegmentList &segments, double frame_hop);

// Durations in seconds of each error category.
struct EderBreakdown {
  double false_alarm = 0.0;  // hypothesis non-neutral, reference neutral
  double missed = 0.0;       // hypothesis neutral, reference non-neutral
  double confusion = 0.0;    // both non-neutral, labels differ
  double total_duration = 0.0;

  double ErrorDuration() const { return false_alarm + missed + confusion; }
  double Rate() const { return ErrorDuration() / total_duration; }
};

// Exact piecewise overlap over the union of both breakpoint sets.
EderBreakdown ComputeEderBreakdown(const SegmentList &reference, const SegmentList &hypothesis);
double Eder(const SegmentList &reference, const SegmentList &hypothesis);

// Fraction of frames whose labels agree.
double Era(const FrameLabelSequence &reference, const FrameLabelSequence &reclassified);

// CSV with header "start,end,label"; total_duration is the last end time.
void WriteSegmentsCsv(std::ostream &os, const SegmentList &segments);
SegmentList ReadSegmentsCsv(std::istream &is);
std::string SegmentsToJson(const SegmentList &segments);
SegmentList SegmentsFromJson(const std::string &text);
std::string FramesToJson(const FrameLabelSequence &frames);
FrameLabelSequence FramesFromJson(const std::string &text);

}  // namespace edlab

#endif  // EDLAB_DIARIZATION_H_
