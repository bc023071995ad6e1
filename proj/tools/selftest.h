// tools/selftest.h

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

#ifndef EDLAB_TOOLS_SELFTEST_H_
#define EDLAB_TOOLS_SELFTEST_H_

#include <ostream>
#include <string>

namespace edlab {

struct SelftestReport {
  int failures = 0;
  std::string json;  // one entry per check; no timings, so reruns are byte-identical
};

// Analytic-oracle and brute-force-oracle checks; progress goes to `log`.
SelftestReport RunSelftest(std::ostream &log);

}  // namespace edlab

#endif  // EDLAB_TOOLS_SELFTEST_H_
