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
#include <random>
#include <string_view>
#include <vector>

namespace taskreso {

/// Seeded stream with platform-independent derived draws.
///
/// std::mt19937_64's raw output is fixed by the standard, but the library
/// distributions are not, so every draw is derived here by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool coin() { return (engine_() >> 63) != 0; }

  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// `count` distinct indices from [0, n), in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t count, Rng& rng);

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a over bytes, folded into an existing hash state.
std::uint64_t fnv1a(std::string_view bytes,
                    std::uint64_t state = 0xcbf29ce484222325ULL);

/// Pairwise (cascade) summation; result depends only on element order.
double pairwise_sum(const double* data, std::size_t n);

inline double pairwise_mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
}

}  // namespace taskreso
