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

#include "taskreso/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "taskreso/errors.hpp"
#include "taskreso/parallel.hpp"
#include "taskreso/rng.hpp"

namespace taskreso {

namespace {

constexpr double kMinBaseUncertainty = 1e-12;

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

// Mean over replicates, independent of replicate order.
double replicate_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return pairwise_mean(v);
}

/// Queries each listed resolution for every sample using one augmented
/// instance per sample. Results land in manifest order.
std::vector<std::vector<double>> query_resolutions(const DistributionSource& source,
                                                   std::span<const TaskSample> samples,
                                                   std::span<const std::uint32_t> resolutions,
                                                   std::uint64_t aug_seed,
                                                   const AugmentConfig& aug_cfg,
                                                   unsigned threads) {
  if (samples.empty()) throw InvalidArg("no samples");
  std::vector<std::vector<double>> out(resolutions.size(), std::vector<double>(samples.size()));
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    const TaskSample& s = samples[i];
    Image augmented;
    const Image* image = &s.image;
    if (!source.pre_augmented() && !s.image.empty()) {
      AugmentConfig cfg = aug_cfg;
      cfg.seed = sample_aug_seed(aug_seed, s.id);
      augmented = rand_augment(s.image, cfg);
      image = &augmented;
    }
    for (std::size_t r = 0; r < resolutions.size(); ++r) {
      InferenceRequest req{s.id, image, s.prompt, resolutions[r], aug_seed};
      const auto dists = source.infer(req);
      validate_distributions(dists, ErrorClass::kBackend);
      out[r][i] = sample_uncertainty(dists);
    }
  });
  return out;
}

}  // namespace

double token_entropy(const TokenDistribution& d) {
  // Sorted terms make the sum independent of the order of probs.
  std::vector<double> terms;
  terms.reserve(d.probs.size() + 1);
  for (double p : d.probs) terms.push_back(-plogp(p));
  terms.push_back(-plogp(d.tail_mass));
  std::sort(terms.begin(), terms.end());
  return pairwise_sum(terms.data(), terms.size());
}

double sample_uncertainty(std::span<const TokenDistribution> dists) {
  if (dists.empty()) throw InvalidArg("sample_uncertainty: no tokens");
  std::vector<double> h(dists.size());
  for (std::size_t t = 0; t < dists.size(); ++t) h[t] = token_entropy(dists[t]);
  return pairwise_mean(h);
}

std::uint64_t sample_aug_seed(std::uint64_t aug_seed, const std::string& sample_id) {
  return splitmix64(aug_seed ^ fnv1a(sample_id));
}

TaskUncertainty task_uncertainty(const DistributionSource& source,
                                 std::span<const TaskSample> samples, std::uint32_t resolution,
                                 std::uint64_t aug_seed, const AugmentConfig& aug_cfg,
                                 unsigned threads) {
  const std::uint32_t res[] = {resolution};
  auto per = query_resolutions(source, samples, res, aug_seed, aug_cfg, threads);
  TaskUncertainty out;
  out.per_sample = std::move(per[0]);
  out.u = pairwise_mean(out.per_sample);
  return out;
}

VarianceResult measure_variance(const DistributionSource& source,
                                std::span<const TaskSample> samples, std::uint32_t base_res,
                                std::uint32_t ext_res,
                                std::span<const std::uint64_t> replicate_seeds,
                                const AugmentConfig& aug_cfg, unsigned threads) {
  if (replicate_seeds.empty()) throw InvalidArg("measure_variance: no replicate seeds");
  if (samples.empty()) throw InvalidArg("measure_variance: no samples");
  const std::uint32_t res[] = {base_res, ext_res};
  const std::size_t n = samples.size();

  VarianceResult out;
  std::vector<double> u1s, u2s;
  std::vector<std::vector<double>> s1(n), s2(n);
  for (std::uint64_t seed : replicate_seeds) {
    auto per = query_resolutions(source, samples, res, seed, aug_cfg, threads);
    const double u1 = pairwise_mean(per[0]);
    const double u2 = pairwise_mean(per[1]);
    if (u1 <= kMinBaseUncertainty) {
      throw DegenerateUncertainty("base-resolution uncertainty " + std::to_string(u1) +
                                  " for replicate seed " + std::to_string(seed) +
                                  " is too small to divide by");
    }
    out.per_replicate.push_back((u2 - u1) / u1);
    u1s.push_back(u1);
    u2s.push_back(u2);
    for (std::size_t i = 0; i < n; ++i) {
      s1[i].push_back(per[0][i]);
      s2[i].push_back(per[1][i]);
    }
  }
  out.v = replicate_mean(out.per_replicate);
  out.u1 = replicate_mean(u1s);
  out.u2 = replicate_mean(u2s);
  out.per_sample_u1.resize(n);
  out.per_sample_u2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.per_sample_u1[i] = replicate_mean(s1[i]);
    out.per_sample_u2[i] = replicate_mean(s2[i]);
  }
  return out;
}

}  // namespace taskreso
