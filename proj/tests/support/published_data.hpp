// Copyright 2026 The taskreso Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Published per-task statistics used as golden inputs by the selector tests
// and the acceptance suite.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "taskreso/rng.hpp"
#include "taskreso/selector.hpp"

namespace testsupport {

struct PublishedTask {
  const char* name;
  double c;
  double v;  // fraction, not percent
  double cv_row;  // printed C x V, rounded to 4 places
  std::uint32_t preferred;
  double c_ratio;  // per-sample sd / mean
  double v_ratio;
};

inline constexpr std::array<PublishedTask, 8> kPublished = {{
    {"SciQA-IMG", 0.1437, 0.0647, 0.0093, 336, 0.2384, 2.5466},
    {"VizWiz", 0.2191, 0.0183, 0.0040, 336, 0.1541, 6.0196},
    {"TextVQA", 0.2919, 0.0488, 0.0142, 448, 0.1318, 3.3405},
    {"GQA", 0.3236, 0.0534, 0.0173, 448, 0.0910, 4.9103},
    {"VQAv2", 0.3017, 0.0526, 0.0159, 448, 0.1242, 4.2562},
    {"OKVQA", 0.3112, 0.0672, 0.0209, 560, 0.1224, 3.7711},
    {"MMBench", 0.2323, 0.1079, 0.0251, 560, 0.2196, 2.8915},
    {"MMBench-CN", 0.2329, 0.1045, 0.0243, 560, 0.2197, 2.8310},
}};

inline const PublishedTask& published(const std::string& name) {
  for (const auto& t : kPublished)
    if (name == t.name) return t;
  throw std::out_of_range(name);
}

// n values with exactly the given population mean and sd / mean ratio:
// seeded normal draws, standardized, then mapped affinely.
inline std::vector<double> list_with_ratio(std::size_t n, double mean, double ratio,
                                           std::uint64_t seed) {
  taskreso::Rng rng(seed);
  std::vector<double> z(n);
  for (auto& x : z) x = rng.normal();
  double m = 0, s = 0;
  for (double x : z) m += x;
  m /= n;
  for (double x : z) s += (x - m) * (x - m);
  s = std::sqrt(s / n);
  for (auto& x : z) x = mean + ratio * mean * (x - m) / s;
  return z;
}

inline std::vector<taskreso::TaskStats> published_stats(std::size_t per_sample = 0,
                                                        std::uint64_t seed = 1) {
  std::vector<taskreso::TaskStats> out;
  std::uint64_t s = seed;
  for (const auto& t : kPublished) {
    taskreso::TaskStats ts{t.name, t.c, t.v, {}, {}};
    if (per_sample > 0) {
      ts.per_sample_c = list_with_ratio(per_sample, t.c, t.c_ratio, s++);
      ts.per_sample_v = list_with_ratio(per_sample, t.v, t.v_ratio, s++);
    }
    out.push_back(std::move(ts));
  }
  return out;
}

// The three calibration references: SciQA-IMG -> 336, VQAv2 -> 448, OKVQA -> 560.
inline std::vector<taskreso::ReferenceTask> published_references() {
  std::vector<taskreso::ReferenceTask> refs;
  for (const char* name : {"SciQA-IMG", "VQAv2", "OKVQA"}) {
    const auto& t = published(name);
    refs.push_back({taskreso::TaskStats{t.name, t.c, t.v, {}, {}}, t.preferred});
  }
  return refs;
}

}  // namespace testsupport
