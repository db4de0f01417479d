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

#include "taskreso/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "taskreso/errors.hpp"
#include "taskreso/parallel.hpp"
#include "taskreso/rng.hpp"

namespace taskreso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDegenerateMean = 1e-12;

KInterval intersect(const KInterval& a, const KInterval& b) {
  if (a.empty || b.empty) return {0, 0, true, false, true};
  KInterval r;
  if (a.lo > b.lo) {
    r.lo = a.lo;
    r.lo_closed = a.lo_closed;
  } else if (b.lo > a.lo) {
    r.lo = b.lo;
    r.lo_closed = b.lo_closed;
  } else {
    r.lo = a.lo;
    r.lo_closed = a.lo_closed && b.lo_closed;
  }
  if (a.hi < b.hi) {
    r.hi = a.hi;
    r.hi_closed = a.hi_closed;
  } else if (b.hi < a.hi) {
    r.hi = b.hi;
    r.hi_closed = b.hi_closed;
  } else {
    r.hi = a.hi;
    r.hi_closed = a.hi_closed && b.hi_closed;
  }
  r.empty = r.lo > r.hi || (r.lo == r.hi && !(r.lo_closed && r.hi_closed));
  return r;
}

std::string describe(const KInterval& in) {
  if (in.empty) return "empty";
  std::ostringstream os;
  os << (in.lo_closed ? '[' : '(') << in.lo << ", " << in.hi << (in.hi_closed ? ']' : ')');
  return os.str();
}

std::string diagnostics(const KFeasibility& f) {
  std::ostringstream os;
  for (const auto& c : f.per_reference) {
    os << "\n  " << c.task << " (target " << c.target << ", c*v=" << c.cv
       << "): k in " << describe(c.interval);
  }
  return os.str();
}

double mean_of(std::span<const double> values, const std::vector<std::size_t>& idx) {
  std::vector<double> picked(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) picked[i] = values[idx[i]];
  return pairwise_mean(picked);
}

}  // namespace

void FormulaParams::validate() const {
  if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidArg("k must be a finite value >= 0");
  if (reso0 == 0) throw InvalidArg("reso0 must be positive");
}

void Ladder::validate(std::uint32_t patch_size) const {
  if (resolutions.empty()) throw InvalidArg("ladder is empty");
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    if (resolutions[i] == 0) throw InvalidArg("ladder entries must be positive");
    if (i > 0 && resolutions[i] <= resolutions[i - 1]) {
      throw InvalidArg("ladder must be strictly increasing");
    }
    if (patch_size > 0 && resolutions[i] % patch_size != 0) {
      throw InvalidArg("ladder entry " + std::to_string(resolutions[i]) +
                       " is not divisible by patch size " + std::to_string(patch_size));
    }
  }
}

bool Ladder::contains(std::uint32_t r) const {
  return std::binary_search(resolutions.begin(), resolutions.end(), r);
}

void TaskStats::validate() const {
  if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
    throw InvalidArg("task '" + task + "': C must lie in [0, 1]");
  }
  if (!std::isfinite(v)) throw InvalidArg("task '" + task + "': V must be finite");
  if (per_sample_c.empty() != per_sample_v.empty() ||
      per_sample_c.size() != per_sample_v.size()) {
    throw InvalidArg("task '" + task + "': per-sample C and V lists must be aligned");
  }
}

double raw_resolution(double c, double v, const FormulaParams& params) {
  return params.reso0 * (1.0 + params.k * c * v);
}

std::uint32_t map_to_ladder(double raw, const Ladder& ladder) {
  const auto& r = ladder.resolutions;
  // First entry strictly greater than raw; the one before it is the answer.
  auto it = std::upper_bound(r.begin(), r.end(), raw,
                             [](double x, std::uint32_t e) { return x < static_cast<double>(e); });
  if (it == r.begin()) return r.front();
  return *std::prev(it);
}

std::uint32_t predict_resolution(const TaskStats& stats, const FormulaParams& params,
                                 const Ladder& ladder) {
  return map_to_ladder(raw_resolution(stats.c, stats.v, params), ladder);
}

bool KInterval::contains(double k) const {
  if (empty) return false;
  const bool above = lo_closed ? k >= lo : k > lo;
  const bool below = hi_closed ? k <= hi : k < hi;
  return above && below;
}

KFeasibility feasible_k_interval(std::span<const ReferenceTask> refs, std::uint32_t reso0,
                                 const Ladder& ladder) {
  ladder.validate();
  if (reso0 == 0) throw InvalidArg("reso0 must be positive");
  if (refs.empty()) throw InvalidArg("no reference tasks");
  const auto& rungs = ladder.resolutions;
  const KInterval non_negative{0.0, kInf, true, false, false};

  KFeasibility out;
  out.interval = non_negative;
  for (const auto& ref : refs) {
    auto pos = std::find(rungs.begin(), rungs.end(), ref.target);
    if (pos == rungs.end()) {
      throw InvalidArg("reference '" + ref.stats.task + "' target " +
                       std::to_string(ref.target) + " is not on the ladder");
    }
    // Admissible raw resolutions: [lower, upper).
    const double lower = pos == rungs.begin() ? -kInf : static_cast<double>(*pos);
    const double upper = std::next(pos) == rungs.end() ? kInf : static_cast<double>(*std::next(pos));
    const double cv = ref.stats.c * ref.stats.v;
    const double base = static_cast<double>(reso0);

    KInterval own;
    if (cv > 0.0) {
      own = {(lower / base - 1.0) / cv, (upper / base - 1.0) / cv, true, false, false};
    } else if (cv < 0.0) {
      own = {(upper / base - 1.0) / cv, (lower / base - 1.0) / cv, false, true, false};
    } else {
      const bool ok = lower <= base && base < upper;
      own = {-kInf, kInf, false, false, !ok};
    }
    own = intersect(own, non_negative);
    out.per_reference.push_back({ref.stats.task, ref.target, cv, own});
    if (own.empty) {
      throw InfeasibleTarget("reference '" + ref.stats.task + "' (c*v=" + std::to_string(cv) +
                             ") cannot reach target " + std::to_string(ref.target) +
                             " from reso0=" + std::to_string(reso0) + " for any k >= 0");
    }
    out.interval = intersect(out.interval, own);
  }
  return out;
}

Calibration calibrate_k(std::span<const ReferenceTask> refs, std::uint32_t reso0,
                        const Ladder& ladder, CalibrationPolicy policy, double explicit_k) {
  KFeasibility f;
  try {
    f = feasible_k_interval(refs, reso0, ladder);
  } catch (const InfeasibleTarget& e) {
    throw CalibrationFailed(e.what());
  }
  const KInterval& in = f.interval;
  if (in.empty) {
    throw CalibrationFailed("reference constraints do not intersect:" + diagnostics(f));
  }

  const double smallest = in.lo_closed ? in.lo : std::nextafter(in.lo, kInf);
  double k = 0.0;
  switch (policy) {
    case CalibrationPolicy::kSmallest:
      k = smallest;
      break;
    case CalibrationPolicy::kMidpoint:
      k = std::isfinite(in.hi) ? 0.5 * (in.lo + in.hi) : smallest;
      break;
    case CalibrationPolicy::kExplicit:
      k = explicit_k;
      if (!in.contains(k)) {
        std::string violated;
        for (const auto& c : f.per_reference) {
          if (!c.interval.contains(k)) violated += (violated.empty() ? "" : ", ") + c.task;
        }
        std::ostringstream os;
        os << "k=" << k << " lies outside the feasible interval " << describe(in)
           << "; violated by: " << violated << diagnostics(f);
        throw CalibrationFailed(os.str());
      }
      break;
  }

  FormulaParams params{k, reso0};
  params.validate();
  for (const auto& ref : refs) {
    const auto got = predict_resolution(ref.stats, params, ladder);
    if (got != ref.target) {
      throw CalibrationFailed("k=" + std::to_string(k) + " maps '" + ref.stats.task + "' to " +
                              std::to_string(got) + ", expected " +
                              std::to_string(ref.target) + diagnostics(f));
    }
  }
  return {params, std::move(f)};
}

std::vector<RatioOutcome> robustness_experiment(std::span<const TaskStats> tasks,
                                                std::span<const double> ratios,
                                                std::uint32_t repeats, std::uint64_t seed,
                                                const FormulaParams& params,
                                                const Ladder& ladder, unsigned threads) {
  if (ratios.empty()) throw InvalidArg("no sampling ratios");
  if (repeats == 0) throw InvalidArg("repeats must be >= 1");
  if (tasks.empty()) throw InvalidArg("no tasks");
  for (double r : ratios) {
    if (!(r > 0.0 && r <= 1.0)) throw InvalidArg("sampling ratios must lie in (0, 1]");
  }
  params.validate();
  ladder.validate();

  std::vector<std::uint32_t> full(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    tasks[t].validate();
    if (!tasks[t].has_per_sample()) {
      throw InvalidArg("task '" + tasks[t].task + "' has no per-sample C/V lists");
    }
    std::vector<std::size_t> all(tasks[t].per_sample_c.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    full[t] = map_to_ladder(raw_resolution(mean_of(tasks[t].per_sample_c, all),
                                           mean_of(tasks[t].per_sample_v, all), params),
                            ladder);
  }

  std::vector<RatioOutcome> out;
  for (double ratio : ratios) {
    std::vector<char> ok(repeats, 0);
    parallel_for(repeats, threads, [&](std::size_t rep) {
      Rng rng(seed + rep);
      bool all_match = true;
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        const std::size_t n = tasks[t].per_sample_c.size();
        const auto m = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9)));
        auto idx = sample_without_replacement(n, m, rng);
        std::sort(idx.begin(), idx.end());
        const double c = mean_of(tasks[t].per_sample_c, idx);
        const double v = mean_of(tasks[t].per_sample_v, idx);
        if (map_to_ladder(raw_resolution(c, v, params), ladder) != full[t]) all_match = false;
      }
      ok[rep] = all_match ? 1 : 0;
    });
    RatioOutcome o;
    o.ratio = ratio;
    o.repeats = repeats;
    o.successes = static_cast<std::uint32_t>(std::count(ok.begin(), ok.end(), 1));
    o.success_rate = static_cast<double>(o.successes) / repeats;
    out.push_back(o);
  }
  return out;
}

Dispersion dispersion_stats(std::span<const double> values, bool with_ratio) {
  if (values.empty()) throw InvalidArg("dispersion_stats: empty list");
  Dispersion d;
  d.mean = pairwise_sum(values.data(), values.size()) / static_cast<double>(values.size());
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = values[i] - d.mean;
    sq[i] = t * t;
  }
  d.sd = std::sqrt(pairwise_mean(sq));
  if (with_ratio) {
    if (std::abs(d.mean) <= kDegenerateMean) {
      throw DegenerateMean("mean " + std::to_string(d.mean) + " is too close to zero for sd/mean");
    }
    d.ratio = d.sd / d.mean;
  }
  return d;
}

}  // namespace taskreso
