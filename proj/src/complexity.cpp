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

#include "taskreso/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "taskreso/errors.hpp"
#include "taskreso/parallel.hpp"
#include "taskreso/rng.hpp"

namespace taskreso {

namespace {

constexpr double kVarianceFloor = 1e-4;
constexpr int kMaxLloydIterations = 100;

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double t = a[d] - b[d];
    s += t * t;
  }
  return s;
}

std::uint32_t nearest(const double* row, const std::vector<double>& centroids,
                      std::uint32_t k, std::size_t dim) {
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::uint32_t j = 0; j < k; ++j) {
    const double d = sq_dist(row, centroids.data() + j * dim, dim);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

std::vector<std::size_t> draw_subsample(std::size_t n, double rate, std::uint64_t seed) {
  const auto m = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-9)));
  Rng rng(splitmix64(seed ^ 0x5ab5a3b1e0ULL));
  auto idx = sample_without_replacement(n, m, rng);
  std::sort(idx.begin(), idx.end());
  return idx;
}

KMeansFit fit_on_subsample(FeatureView f, std::uint32_t k, const std::vector<std::size_t>& sub,
                           std::uint64_t seed) {
  const std::size_t dim = f.dim;
  const std::size_t m = sub.size();
  auto row = [&](std::size_t i) { return f.data.data() + sub[i] * dim; };

  Rng rng(splitmix64(seed + 0x9e37ULL * k));
  std::vector<double> centroids(static_cast<std::size_t>(k) * dim);

  // k-means++ seeding.
  std::size_t first = static_cast<std::size_t>(rng.below(m));
  std::copy_n(row(first), dim, centroids.begin());
  std::vector<double> d2(m);
  for (std::size_t i = 0; i < m; ++i) d2[i] = sq_dist(row(i), centroids.data(), dim);
  for (std::uint32_t j = 1; j < k; ++j) {
    const double total = pairwise_sum(d2.data(), m);
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = m - 1;
      for (std::size_t i = 0; i < m; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(m));
    }
    std::copy_n(row(pick), dim, centroids.begin() + static_cast<std::ptrdiff_t>(j * dim));
    for (std::size_t i = 0; i < m; ++i) {
      d2[i] = std::min(d2[i], sq_dist(row(i), centroids.data() + j * dim, dim));
    }
  }

  // Lloyd iterations on the subsample.
  std::vector<std::uint32_t> assign(m, std::numeric_limits<std::uint32_t>::max());
  std::vector<double> sums(centroids.size());
  std::vector<std::size_t> counts(k);
  for (int it = 0; it < kMaxLloydIterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      const std::uint32_t a = nearest(row(i), centroids, k, dim);
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
    }
    if (!changed) break;
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      const double* r = row(i);
      double* s = sums.data() + assign[i] * dim;
      for (std::size_t d = 0; d < dim; ++d) s[d] += r[d];
      ++counts[assign[i]];
    }
    for (std::uint32_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t d = 0; d < dim; ++d) {
        centroids[j * dim + d] = sums[j * dim + d] / static_cast<double>(counts[j]);
      }
    }
  }

  KMeansFit fit;
  fit.labels.resize(f.n);
  for (std::size_t i = 0; i < f.n; ++i) {
    fit.labels[i] = nearest(f.data.data() + i * dim, centroids, k, dim);
  }
  fit.centroids = std::move(centroids);
  return fit;
}

void check_view(FeatureView f) {
  if (f.n == 0) throw InvalidArg("no feature rows");
  if (f.dim == 0 || f.data.size() != f.n * f.dim) throw InvalidArg("feature shape mismatch");
}

}  // namespace

void ComplexityConfig::validate() const {
  if (max_clusters < 1) throw InvalidArg("max_clusters must be >= 1");
  if (!(subsample_rate > 0.0 && subsample_rate <= 1.0)) {
    throw InvalidArg("subsample_rate must lie in (0, 1]");
  }
  if (levels != 1 && levels != 2) throw InvalidArg("levels must be 1 or 2");
  if (work_size == 0) throw InvalidArg("work_size must be positive");
  if (level2_patch == 0) throw InvalidArg("level2_patch must be positive");
}

KMeansFit kmeans_fixed_k(FeatureView features, std::uint32_t k, double subsample_rate,
                         std::uint64_t seed) {
  check_view(features);
  if (k == 0) throw InvalidArg("k must be positive");
  const auto sub = draw_subsample(features.n, subsample_rate, seed);
  return fit_on_subsample(features, k, sub, seed);
}

double description_length(FeatureView f, std::span<const std::uint32_t> labels,
                          std::uint32_t k) {
  check_view(f);
  if (labels.size() != f.n) throw InvalidArg("label count does not match rows");
  const std::size_t dim = f.dim;
  std::vector<std::size_t> count(k, 0);
  std::vector<double> mean(static_cast<std::size_t>(k) * dim, 0.0);
  for (std::size_t i = 0; i < f.n; ++i) {
    if (labels[i] >= k) throw InvalidArg("label out of range");
    ++count[labels[i]];
    for (std::size_t d = 0; d < dim; ++d) mean[labels[i] * dim + d] += f.data[i * dim + d];
  }
  for (std::uint32_t j = 0; j < k; ++j) {
    if (count[j] == 0) continue;
    for (std::size_t d = 0; d < dim; ++d) mean[j * dim + d] /= static_cast<double>(count[j]);
  }
  std::vector<double> var(mean.size(), 0.0);
  for (std::size_t i = 0; i < f.n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double t = f.data[i * dim + d] - mean[labels[i] * dim + d];
      var[labels[i] * dim + d] += t * t;
    }
  }
  for (std::uint32_t j = 0; j < k; ++j) {
    for (std::size_t d = 0; d < dim; ++d) {
      double& v = var[j * dim + d];
      v = count[j] == 0 ? kVarianceFloor
                        : std::max(v / static_cast<double>(count[j]), kVarianceFloor);
    }
  }

  const double n = static_cast<double>(f.n);
  double nll_nats = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    const std::uint32_t j = labels[i];
    double ll = std::log(static_cast<double>(count[j]) / n);
    for (std::size_t d = 0; d < dim; ++d) {
      const double v = var[j * dim + d];
      const double t = f.data[i * dim + d] - mean[j * dim + d];
      ll -= 0.5 * std::log(2.0 * std::numbers::pi * v) + t * t / (2.0 * v);
    }
    nll_nats -= ll;
  }
  const double params = static_cast<double>(k) * 2.0 * static_cast<double>(dim) + (k - 1.0);
  return 0.5 * params * std::log2(n) + nll_nats / std::numbers::ln2;
}

Clustering mdl_cluster(FeatureView features, const ComplexityConfig& cfg) {
  cfg.validate();
  check_view(features);
  const auto sub = draw_subsample(features.n, cfg.subsample_rate, cfg.seed);

  Clustering best;
  best.candidate_dl.reserve(cfg.max_clusters);
  double best_dl = std::numeric_limits<double>::infinity();
  for (std::uint32_t k = 1; k <= cfg.max_clusters; ++k) {
    KMeansFit fit = fit_on_subsample(features, k, sub, cfg.seed);
    const double dl = description_length(features, fit.labels, k);
    best.candidate_dl.push_back(dl);
    if (dl < best_dl) {
      best_dl = dl;
      best.k_effective = k;
      best.labels = std::move(fit.labels);
      best.centroids = std::move(fit.centroids);
      best.description_length = dl;
    }
  }
  return best;
}

double label_entropy(std::span<const std::uint32_t> labels, std::uint32_t k) {
  if (labels.empty()) throw InvalidArg("label_entropy: empty labels");
  std::vector<std::size_t> counts(k, 0);
  for (auto l : labels) {
    if (l >= k) throw InvalidArg("label_entropy: label out of range");
    ++counts[l];
  }
  const double n = static_cast<double>(labels.size());
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

ComplexityScore complexity_raw(const Image& img, const ComplexityConfig& cfg) {
  cfg.validate();
  const Image work = resize(img, cfg.work_size, cfg.work_size);
  const LabFeatureSet lab = rgb_to_lab(work);
  const Clustering level1 = mdl_cluster(view_of(lab), cfg);

  ComplexityScore score;
  score.raw = label_entropy(level1.labels, level1.k_effective);
  if (cfg.levels == 2) {
    LabelMap map{work.width(), work.height(), level1.labels};
    const auto hists = patch_histograms(map, level1.k_effective, cfg.level2_patch);
    std::vector<double> flat;
    flat.reserve(hists.size() * level1.k_effective);
    for (const auto& h : hists) flat.insert(flat.end(), h.begin(), h.end());
    ComplexityConfig cfg2 = cfg;
    cfg2.seed = splitmix64(cfg.seed);
    const Clustering level2 =
        mdl_cluster(FeatureView{flat, hists.size(), level1.k_effective}, cfg2);
    score.raw += label_entropy(level2.labels, level2.k_effective);
  }
  return score;
}

ReferenceBounds reference_bounds(std::span<const Image> images, const ComplexityConfig& cfg,
                                 unsigned threads) {
  if (images.size() < 2) throw InvalidArg("reference_bounds needs at least 2 images");
  std::vector<double> raws(images.size());
  parallel_for(images.size(), threads,
               [&](std::size_t i) { raws[i] = complexity_raw(images[i], cfg).raw; });
  const auto [lo, hi] = std::minmax_element(raws.begin(), raws.end());
  return {*lo, *hi, static_cast<std::uint32_t>(images.size())};
}

double normalize(double raw, const ReferenceBounds& bounds) {
  if (bounds.max_raw <= bounds.min_raw) return 0.5;
  return std::clamp((raw - bounds.min_raw) / (bounds.max_raw - bounds.min_raw), 0.0, 1.0);
}

TaskComplexity task_complexity(std::span<const Image> samples, const ComplexityConfig& cfg,
                               const ReferenceBounds& bounds, unsigned threads) {
  if (samples.empty()) throw InvalidArg("task_complexity: no samples");
  if (bounds.min_raw > bounds.max_raw) throw InvalidArg("reference bounds min > max");
  TaskComplexity out;
  out.per_sample.resize(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    const double raw = complexity_raw(samples[i], cfg).raw;
    out.per_sample[i] = {raw, normalize(raw, bounds)};
  });
  std::vector<double> norm(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) norm[i] = out.per_sample[i].normalized;
  out.c = pairwise_mean(norm);
  return out;
}

}  // namespace taskreso
