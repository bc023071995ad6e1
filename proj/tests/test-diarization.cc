// tests/test-diarization.cc

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

#include <sstream>

#include "edlab/diarization.h"

using namespace edlab;

namespace {

constexpr int kAngry = 1, kSad = 2;

SegmentList TenSeconds(double a, double b, int label) {
  return {{{0.0, a, kNeutralLabel}, {a, b, label}, {b, 10.0, kNeutralLabel}}, 10.0};
}

// Frame-quantized EDER at a fine hop, as an independent check.
double FrameEder(const FrameLabelSequence &r, const FrameLabelSequence &h) {
  int err = 0;
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    const int a = r.labels[i], b = h.labels[i];
    if (a != b) ++err;  // every disagreement falls in exactly one category
  }
  return static_cast<double>(err) / r.labels.size();
}

}  // namespace

TEST_CASE("frames to segments examples") {
  const SegmentList s = FramesToSegments({{1, 1, 2}, 0.01});
  REQUIRE(s.segments.size() == 2);
  CHECK(s.segments[0].start == 0.0);
  CHECK(s.segments[0].end == doctest::Approx(0.02));
  CHECK(s.segments[0].label == 1);
  CHECK(s.segments[1].start == doctest::Approx(0.02));
  CHECK(s.segments[1].end == doctest::Approx(0.03));
  CHECK(s.segments[1].label == 2);
  CHECK(s.total_duration == doctest::Approx(0.03));
  CHECK(FramesToSegments({std::vector<int>(50, 3), 0.01}).segments.size() == 1);
  CHECK(FramesToSegments({{0, 1, 0, 1, 0, 1}, 0.02}).segments.size() == 6);
  CHECK_THROWS_AS(FramesToSegments({{}, 0.01}), DomainError);
  CHECK_THROWS_AS(FramesToSegments({{1}, 0.0}), DomainError);
}

TEST_CASE("property: frame/segment round trip") {
  Rng rng(1);
  std::uniform_int_distribution<int> lab(0, 3), len(1, 200), run(1, 9);
  for (int trial = 0; trial < 200; ++trial) {
    FrameLabelSequence f;
    f.frame_hop = trial % 2 ? 0.01 : 0.0125;
    const int n = len(rng);
    while (static_cast<int>(f.labels.size()) < n) {
      const int l = lab(rng), r = run(rng);
      for (int k = 0; k < r && static_cast<int>(f.labels.size()) < n; ++k) f.labels.push_back(l);
    }
    const SegmentList s = FramesToSegments(f);
    s.Validate();
    for (std::size_t i = 1; i < s.segments.size(); ++i)
      CHECK(s.segments[i].label != s.segments[i - 1].label);
    CHECK(SegmentsToFrames(s, f.frame_hop).labels == f.labels);
  }
}

TEST_CASE("segment validation") {
  CHECK_NOTHROW(TenSeconds(2, 6, kAngry).Validate());
  CHECK_THROWS_AS((SegmentList{{{0, 4, 0}, {5, 10, 1}}, 10.0}).Validate(), DomainError);
  CHECK_THROWS_AS((SegmentList{{{0, 4, 0}, {3, 10, 1}}, 10.0}).Validate(), DomainError);
  CHECK_THROWS_AS((SegmentList{{{1, 10, 0}}, 10.0}).Validate(), DomainError);
  CHECK_THROWS_AS((SegmentList{{{0, 9, 0}}, 10.0}).Validate(), DomainError);
  CHECK_THROWS_AS((SegmentList{{}, 10.0}).Validate(), DomainError);
}

TEST_CASE("EDER hand cases") {
  const SegmentList ref = TenSeconds(2, 6, kAngry);
  CHECK(Eder(ref, ref) == 0.0);
  const EderBreakdown b = ComputeEderBreakdown(ref, TenSeconds(3, 7, kAngry));
  CHECK(b.missed == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.false_alarm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.confusion == 0.0);
  CHECK(std::abs(b.Rate() - 0.2) < 1e-12);
  const EderBreakdown c = ComputeEderBreakdown(ref, TenSeconds(2, 6, kSad));
  CHECK(c.confusion == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(c.false_alarm + c.missed == 0.0);
  CHECK(std::abs(c.Rate() - 0.4) < 1e-12);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", Eder(ref, TenSeconds(3, 7, kAngry)));
  CHECK(std::string(buf) == "0.200000");
  std::snprintf(buf, sizeof buf, "%.6f", Eder(ref, TenSeconds(2, 6, kSad)));
  CHECK(std::string(buf) == "0.400000");
}

TEST_CASE("EDER rejects differing durations") {
  SegmentList other = TenSeconds(2, 6, kAngry);
  other.segments.back().end = 9.0;
  other.total_duration = 9.0;
  CHECK_THROWS_AS(Eder(TenSeconds(2, 6, kAngry), other), DomainError);
}

TEST_CASE("property: EDER is bounded and agrees with fine frame counting") {
  Rng rng(2);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    FrameLabelSequence r{{}, 0.01}, h{{}, 0.01};
    const int n = 20 + trial;
    for (int i = 0; i < n; ++i) {
      r.labels.push_back(i % 7 == 0 ? lab(rng) : (r.labels.empty() ? 0 : r.labels.back()));
      h.labels.push_back(i % 5 == 0 ? lab(rng) : (h.labels.empty() ? 0 : h.labels.back()));
    }
    const EderBreakdown b = ComputeEderBreakdown(FramesToSegments(r), FramesToSegments(h));
    CHECK(b.Rate() >= 0.0);
    CHECK(b.Rate() <= 1.0 + 1e-12);
    CHECK(b.Rate() == doctest::Approx(FrameEder(r, h)).epsilon(1e-9));
    CHECK(b.ErrorDuration() == doctest::Approx(b.false_alarm + b.missed + b.confusion));
    // swapping roles swaps false alarm and missed; confusion stays
    const EderBreakdown s = ComputeEderBreakdown(FramesToSegments(h), FramesToSegments(r));
    CHECK(s.false_alarm == doctest::Approx(b.missed));
    CHECK(s.missed == doctest::Approx(b.false_alarm));
    CHECK(s.confusion == doctest::Approx(b.confusion));
  }
}

TEST_CASE("EDER with sub-frame boundaries uses exact overlap") {
  const SegmentList ref{{{0, 0.333, 0}, {0.333, 1.0, 1}}, 1.0};
  const SegmentList hyp{{{0, 0.5, 0}, {0.5, 1.0, 1}}, 1.0};
  CHECK(Eder(ref, hyp) == doctest::Approx(0.167).epsilon(1e-12));
}

TEST_CASE("ERA examples") {
  CHECK(Era({{0, 1, 2}, 0.01}, {{0, 1, 2}, 0.01}) == 1.0);
  CHECK(Era({{0, 1, 2}, 0.01}, {{1, 2, 0}, 0.01}) == 0.0);
  CHECK(Era({{0, 1, 2, 3}, 0.01}, {{0, 1, 2, 0}, 0.01}) == 0.75);
  CHECK_THROWS_AS(Era({{0, 1}, 0.01}, {{0}, 0.01}), DomainError);
}

TEST_CASE("CSV and JSON round trips") {
  const SegmentList s{{{0, 0.123457, 0}, {0.123457, 2.5, 3}, {2.5, 4.0, 1}}, 4.0};
  std::stringstream ss;
  WriteSegmentsCsv(ss, s);
  CHECK(ss.str().rfind("start,end,label\n", 0) == 0);
  const SegmentList back = ReadSegmentsCsv(ss);
  REQUIRE(back.segments.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(back.segments[i].start == doctest::Approx(s.segments[i].start).epsilon(1e-9));
    CHECK(back.segments[i].end == doctest::Approx(s.segments[i].end).epsilon(1e-9));
    CHECK(back.segments[i].label == s.segments[i].label);
  }
  CHECK(back.total_duration == doctest::Approx(4.0));
  const SegmentList j = SegmentsFromJson(SegmentsToJson(s));
  CHECK(j.segments == s.segments);
  CHECK(j.total_duration == s.total_duration);
  const FrameLabelSequence f{{0, 0, 2, 1}, 0.02};
  const FrameLabelSequence fj = FramesFromJson(FramesToJson(f));
  CHECK(fj.labels == f.labels);
  CHECK(fj.frame_hop == f.frame_hop);
  std::stringstream bad("start,end,label\n0,1\n");
  CHECK_THROWS_AS(ReadSegmentsCsv(bad), DomainError);
  std::stringstream empty("start,end,label\n");
  CHECK_THROWS_AS(ReadSegmentsCsv(empty), DomainError);
}
