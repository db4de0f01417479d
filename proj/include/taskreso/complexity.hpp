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
#include <string>
#include <vector>

#include "taskreso/image.hpp"

namespace taskreso {

struct ComplexityConfig {
  std::uint32_t max_clusters = 8;
  double subsample_rate = 0.8;
  std::uint32_t work_size = 112;
  std::uint32_t levels = 2;
  std::uint32_t level2_patch = 8;
  std::uint64_t seed = 0;

  /// Throws InvalidArg when a field is out of range.
  void validate() const;
};

/// Read-only view of n feature rows of width dim, row-major.
struct FeatureView {
  std::span<const double> data;
  std::size_t n = 0;
  std::size_t dim = 0;
};

inline FeatureView view_of(const LabFeatureSet& f) {
  return {f.data, f.n, LabFeatureSet::dim};
}

/// k-means result for one candidate cluster count.
struct KMeansFit {
  std::vector<std::uint32_t> labels;  // one per row, all rows assigned
  std::vector<double> centroids;      // k x dim
};

struct Clustering {
  std::uint32_t k_effective = 0;
  std::vector<std::uint32_t> labels;
  std::vector<double> centroids;  // k_effective x dim
  double description_length = 0.0;  // bits
  /// DL for candidate k = 1..max_clusters, index k-1.
  std::vector<double> candidate_dl;
};

/// Seeded k-means++ / Lloyd on a subsample of ceil(rate * n) rows drawn
/// without replacement, then every row assigned to its nearest centroid
/// (ties to the lower index).
KMeansFit kmeans_fixed_k(FeatureView features, std::uint32_t k, double subsample_rate,
                         std::uint64_t seed);

/// Two-part code length in bits: (p/2) log2(n) + NLL, p = k*2*dim + (k-1),
/// NLL under a per-cluster diagonal Gaussian (variance floored at 1e-4)
/// plus the mixture-weight code of each row's label.
double description_length(FeatureView features, std::span<const std::uint32_t> labels,
                          std::uint32_t k);

/// Picks k in 1..max_clusters minimizing description_length; ties go to
/// the smaller k. Throws InvalidArg on empty input.
Clustering mdl_cluster(FeatureView features, const ComplexityConfig& cfg);

/// Shannon entropy (nats) of the empirical label distribution.
double label_entropy(std::span<const std::uint32_t> labels, std::uint32_t k);

struct ComplexityScore {
  double raw = 0.0;  // nats
  bool has_normalized = false;
  double normalized = 0.0;
};

struct ReferenceBounds {
  double min_raw = 0.0;
  double max_raw = 0.0;
  std::uint32_t source_count = 0;
};

/// Multi-scale score: level-1 pixel clustering in Lab space on the
/// work_size^2 resample, then level-2 clustering of patch label histograms.
/// raw is the sum of the level entropies.
ComplexityScore complexity_raw(const Image& img, const ComplexityConfig& cfg);

/// Min and max raw score over a reference corpus (>= 2 images).
ReferenceBounds reference_bounds(std::span<const Image> images, const ComplexityConfig& cfg,
                                 unsigned threads = 1);

/// Min-max scaling clamped to [0, 1]; 0.5 for degenerate bounds.
double normalize(double raw, const ReferenceBounds& bounds);

struct SampleComplexity {
  double raw = 0.0;
  double normalized = 0.0;
};

struct TaskComplexity {
  double c = 0.0;  // mean normalized score
  std::vector<SampleComplexity> per_sample;  // input order
};

TaskComplexity task_complexity(std::span<const Image> samples, const ComplexityConfig& cfg,
                               const ReferenceBounds& bounds, unsigned threads = 1);

}  // namespace taskreso
