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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace taskreso {

struct FormulaParams {
  double k = 34.0;
  std::uint32_t reso0 = 336;

  void validate() const;
};

/// Supported square resolutions, strictly increasing.
struct Ladder {
  std::vector<std::uint32_t> resolutions{224, 336, 448, 560, 672};

  /// Throws InvalidArg unless non-empty, strictly increasing and (when
  /// patch_size > 0) every entry divisible by patch_size.
  void validate(std::uint32_t patch_size = 0) const;
  bool contains(std::uint32_t r) const;
};

struct TaskStats {
  std::string task;
  double c = 0.0;
  double v = 0.0;
  std::vector<double> per_sample_c;  // optional, aligned with per_sample_v
  std::vector<double> per_sample_v;

  void validate() const;
  bool has_per_sample() const { return !per_sample_c.empty() && !per_sample_v.empty(); }
};

struct ReferenceTask {
  TaskStats stats;
  std::uint32_t target = 0;  // known-best resolution, a ladder entry
};

/// reso0 * (1 + k * c * v).
double raw_resolution(double c, double v, const FormulaParams& params);

/// Largest ladder entry <= raw, clamped to the ladder ends.
std::uint32_t map_to_ladder(double raw, const Ladder& ladder);

std::uint32_t predict_resolution(const TaskStats& stats, const FormulaParams& params,
                                 const Ladder& ladder);

/// Interval of k with closedness flags. The usual shape is [lo, hi).
struct KInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = false;
  bool empty = false;

  bool contains(double k) const;
};

struct ReferenceConstraint {
  std::string task;
  std::uint32_t target = 0;
  double cv = 0.0;
  KInterval interval;  // k values mapping this reference to its target, k >= 0
};

struct KFeasibility {
  KInterval interval;  // intersection over all references
  std::vector<ReferenceConstraint> per_reference;
};

/// Solves reso0 * (1 + k*c*v) in [target, next ladder entry) per reference
/// (the lowest rung has no lower bound, the highest no upper bound) and
/// intersects the solutions with k >= 0. Throws InfeasibleTarget when one
/// reference alone admits no k, InvalidArg on a target outside the ladder.
KFeasibility feasible_k_interval(std::span<const ReferenceTask> refs, std::uint32_t reso0,
                                 const Ladder& ladder);

enum class CalibrationPolicy { kMidpoint, kSmallest, kExplicit };

struct Calibration {
  FormulaParams params;
  KFeasibility feasibility;
};

/// Picks k from the feasible interval and re-predicts every reference.
/// `explicit_k` is read only for kExplicit. Throws CalibrationFailed with
/// per-reference diagnostics when the interval is empty, the explicit k lies
/// outside it, or a reference fails to reproduce.
Calibration calibrate_k(std::span<const ReferenceTask> refs, std::uint32_t reso0,
                        const Ladder& ladder, CalibrationPolicy policy,
                        double explicit_k = 0.0);

struct RatioOutcome {
  double ratio = 0.0;
  std::uint32_t successes = 0;
  std::uint32_t repeats = 0;
  double success_rate = 0.0;
};

/// For each ratio and repeat, subsamples ceil(ratio * n) aligned per-sample
/// (c, v) pairs per task without replacement, re-predicts from the subset
/// means, and counts the repeat a success when every task keeps its
/// full-data prediction. Repeat r draws from seed + r, so a given repeat
/// sees nested subsets as the ratio grows.
std::vector<RatioOutcome> robustness_experiment(std::span<const TaskStats> tasks,
                                                std::span<const double> ratios,
                                                std::uint32_t repeats, std::uint64_t seed,
                                                const FormulaParams& params,
                                                const Ladder& ladder, unsigned threads = 1);

struct Dispersion {
  double mean = 0.0;
  double sd = 0.0;  // population
  std::optional<double> ratio;  // sd / mean
};

/// Throws InvalidArg on empty input and DegenerateMean when the ratio is
/// requested and |mean| <= 1e-12.
Dispersion dispersion_stats(std::span<const double> values, bool with_ratio = true);

}  // namespace taskreso
