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
#include <span>
#include <vector>

#include "taskreso/augment.hpp"
#include "taskreso/inference.hpp"
#include "taskreso/manifest.hpp"

namespace taskreso {

/// -sum p ln p over probs plus the tail_mass pseudo-token (nats).
double token_entropy(const TokenDistribution& d);

/// Mean token entropy of one generated sequence. Throws InvalidArg if empty.
double sample_uncertainty(std::span<const TokenDistribution> dists);

struct TaskUncertainty {
  double u = 0.0;
  std::vector<double> per_sample;  // manifest order
};

/// Augmentation seed used for one sample within a replicate.
std::uint64_t sample_aug_seed(std::uint64_t aug_seed, const std::string& sample_id);

/// Augments each image (unless the source is pre-augmented), queries the
/// source at `resolution`, and averages sample uncertainties in input order.
/// The first failing sample aborts the task.
TaskUncertainty task_uncertainty(const DistributionSource& source,
                                 std::span<const TaskSample> samples, std::uint32_t resolution,
                                 std::uint64_t aug_seed, const AugmentConfig& aug_cfg,
                                 unsigned threads = 1);

inline const std::vector<std::uint64_t> kDefaultReplicateSeeds = {0, 1, 2};

struct VarianceResult {
  double v = 0.0;                     // mean of per_replicate
  std::vector<double> per_replicate;  // (U2 - U1) / U1, seed order
  double u1 = 0.0;                    // base-resolution U, mean over replicates
  double u2 = 0.0;
  std::vector<double> per_sample_u1;  // per sample, mean over replicates
  std::vector<double> per_sample_u2;
};

/// Relative change of task uncertainty between base_res and ext_res. Within
/// a replicate the same augmented image feeds both resolutions. Throws
/// DegenerateUncertainty when a replicate's U1 <= 1e-12.
VarianceResult measure_variance(const DistributionSource& source,
                                std::span<const TaskSample> samples, std::uint32_t base_res,
                                std::uint32_t ext_res,
                                std::span<const std::uint64_t> replicate_seeds,
                                const AugmentConfig& aug_cfg, unsigned threads = 1);

}  // namespace taskreso
