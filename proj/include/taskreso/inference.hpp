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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "taskreso/errors.hpp"
#include "taskreso/image.hpp"

namespace taskreso {

/// One generated token's probability vector. `tail_mass` carries whatever a
/// top-k dump truncated (0 for full-vocabulary distributions).
struct TokenDistribution {
  std::vector<double> probs;
  double tail_mass = 0.0;

  /// Throws SchemaError (of class `cls`) unless every prob and tail_mass is
  /// finite and >= 0 and the total is 1 within 1e-6.
  void validate(ErrorClass cls = ErrorClass::kConfiguration) const;
};

inline constexpr double kDistributionSumTolerance = 1e-6;

struct InferenceRequest {
  std::string sample_id;
  const Image* image = nullptr;  // not owned; may be null for backends that ignore pixels
  std::string prompt;
  std::uint32_t resolution = 0;  // square side
  std::uint64_t aug_seed = 0;    // replicate key, metadata only
};

/// Anything that answers "which per-token distributions does the model emit
/// for this request". Implementations must tolerate concurrent infer calls.
class DistributionSource {
 public:
  virtual ~DistributionSource() = default;

  /// One distribution per generated token (at least one).
  virtual std::vector<TokenDistribution> infer(const InferenceRequest& req) const = 0;

  /// True when the stored answers were produced from already-augmented
  /// inputs, so callers must not augment again.
  virtual bool pre_augmented() const { return false; }
};

/// Re-checks a backend answer; throws SchemaError (class `cls`).
void validate_distributions(const std::vector<TokenDistribution>& dists,
                            ErrorClass cls = ErrorClass::kConfiguration);

// ---------------------------------------------------------------------------
// File backend: JSONL dump, one record per line:
//   {"sample_id": str, "resolution": u32, "aug_seed": u64,
//    "distributions": [{"probs": [f64...], "tail_mass": f64}, ...]}

class FileBackend final : public DistributionSource {
 public:
  /// Loads and validates every record. Throws IoError, or SchemaError
  /// naming the 1-based line and field.
  static std::unique_ptr<FileBackend> open(const std::filesystem::path& path);

  std::vector<TokenDistribution> infer(const InferenceRequest& req) const override;
  bool pre_augmented() const override { return true; }
  std::size_t record_count() const { return records_.size(); }

 private:
  struct Key {
    std::string sample_id;
    std::uint32_t resolution;
    std::uint64_t aug_seed;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::vector<TokenDistribution>> records_;
};

// ---------------------------------------------------------------------------
// HTTP backend: POST {endpoint}/v1/distributions with
//   {"sample_id", "image_b64" (PNG), "prompt", "resolution"}
// answering {"distributions": [...]}.

struct HttpBackendOptions {
  std::string endpoint;  // e.g. http://127.0.0.1:8080 or http://host/prefix
  std::chrono::duration<double> timeout{30.0};
  std::uint32_t max_inflight = 4;
  std::uint32_t retries = 3;  // extra attempts after the first
  std::chrono::duration<double> backoff_base{0.5};
  double backoff_factor = 2.0;
};

class HttpBackend final : public DistributionSource {
 public:
  /// Throws InvalidArg on a malformed endpoint URL.
  explicit HttpBackend(HttpBackendOptions options);
  ~HttpBackend() override;

  /// Retries on 5xx, connection failures and timeouts; throws BackendError
  /// once attempts are exhausted or on a non-retryable status, SchemaError
  /// (backend class) on a malformed body.
  std::vector<TokenDistribution> infer(const InferenceRequest& req) const override;

 private:
  struct State;
  HttpBackendOptions options_;
  std::string base_;    // scheme://host:port
  std::string prefix_;  // path prefix without trailing slash
  std::unique_ptr<State> state_;
};

std::string base64_encode(const std::vector<std::uint8_t>& bytes);

// ---------------------------------------------------------------------------
// Toy backend: deterministic stand-in. Token t, vocab entry j gets a hashed
// score in [0, 1) keyed by (sample_id, prompt, t, j); probs are
// softmax(sharpness[resolution] * score). Resolution only acts through the
// sharpness table, so equal sharpness gives equal answers.

struct ToyBackendOptions {
  std::uint32_t vocab = 16;
  std::uint32_t tokens = 8;
  std::map<std::uint32_t, double> sharpness_per_res;
};

class ToyBackend final : public DistributionSource {
 public:
  /// Throws InvalidArg if vocab < 2 or tokens < 1.
  explicit ToyBackend(ToyBackendOptions options);

  /// Throws InvalidArg when the resolution has no sharpness entry.
  std::vector<TokenDistribution> infer(const InferenceRequest& req) const override;

  /// The raw hashed score for (sample, prompt, token, vocab index).
  static double score(const std::string& sample_id, const std::string& prompt,
                      std::uint32_t token, std::uint32_t vocab_index);

 private:
  ToyBackendOptions options_;
};

}  // namespace taskreso
