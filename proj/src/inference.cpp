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

#include "taskreso/inference.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "taskreso/rng.hpp"

namespace taskreso {

using nlohmann::json;

void TokenDistribution::validate(ErrorClass cls) const {
  if (probs.empty() && tail_mass == 0.0) throw SchemaError("empty distribution", cls);
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i]) || probs[i] < 0.0) {
      throw SchemaError("probs[" + std::to_string(i) + "] = " + std::to_string(probs[i]) +
                            " is not a non-negative finite number",
                        cls);
    }
    total += probs[i];
  }
  if (!std::isfinite(tail_mass) || tail_mass < 0.0) {
    throw SchemaError("tail_mass must be a non-negative finite number", cls);
  }
  total += tail_mass;
  if (std::abs(total - 1.0) > kDistributionSumTolerance) {
    throw SchemaError("probs + tail_mass sums to " + std::to_string(total) + ", expected 1",
                      cls);
  }
}

void validate_distributions(const std::vector<TokenDistribution>& dists, ErrorClass cls) {
  if (dists.empty()) throw SchemaError("no token distributions returned", cls);
  for (std::size_t t = 0; t < dists.size(); ++t) {
    try {
      dists[t].validate(cls);
    } catch (const SchemaError& e) {
      throw SchemaError("distributions[" + std::to_string(t) + "]: " + e.detail(), cls);
    }
  }
}

namespace {

std::vector<TokenDistribution> parse_distributions(const json& j, ErrorClass cls) {
  if (!j.is_array()) throw SchemaError("field 'distributions' must be an array", cls);
  std::vector<TokenDistribution> out;
  out.reserve(j.size());
  for (std::size_t t = 0; t < j.size(); ++t) {
    const json& d = j[t];
    const std::string where = "distributions[" + std::to_string(t) + "]";
    if (!d.is_object()) throw SchemaError(where + " must be an object", cls);
    auto probs = d.find("probs");
    if (probs == d.end() || !probs->is_array()) {
      throw SchemaError("field '" + where + ".probs' missing or not an array", cls);
    }
    TokenDistribution td;
    td.probs.reserve(probs->size());
    for (const json& p : *probs) {
      if (!p.is_number()) throw SchemaError("field '" + where + ".probs' has a non-number", cls);
      td.probs.push_back(p.get<double>());
    }
    if (auto tail = d.find("tail_mass"); tail != d.end()) {
      if (!tail->is_number()) throw SchemaError("field '" + where + ".tail_mass' not a number", cls);
      td.tail_mass = tail->get<double>();
    }
    out.push_back(std::move(td));
  }
  validate_distributions(out, cls);
  return out;
}

template <typename T>
T require_unsigned(const json& rec, const char* field) {
  auto it = rec.find(field);
  if (it == rec.end()) throw SchemaError(std::string("field '") + field + "' missing");
  if (!it->is_number_unsigned()) {
    throw SchemaError(std::string("field '") + field + "' must be a non-negative integer");
  }
  const auto v = it->get<std::uint64_t>();
  if (v > std::numeric_limits<T>::max()) {
    throw SchemaError(std::string("field '") + field + "' out of range");
  }
  return static_cast<T>(v);
}

}  // namespace

std::unique_ptr<FileBackend> FileBackend::open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dump " + path.string());
  auto backend = std::unique_ptr<FileBackend>(new FileBackend());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      if (!rec.is_object()) throw SchemaError("record is not a JSON object");
      auto id = rec.find("sample_id");
      if (id == rec.end() || !id->is_string()) {
        throw SchemaError("field 'sample_id' missing or not a string");
      }
      Key key{id->get<std::string>(), require_unsigned<std::uint32_t>(rec, "resolution"),
              require_unsigned<std::uint64_t>(rec, "aug_seed")};
      auto dists = rec.find("distributions");
      if (dists == rec.end()) throw SchemaError("field 'distributions' missing");
      auto parsed = parse_distributions(*dists, ErrorClass::kConfiguration);
      if (!backend->records_.emplace(std::move(key), std::move(parsed)).second) {
        throw SchemaError("duplicate (sample_id, resolution, aug_seed) record");
      }
    } catch (const json::exception& e) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": " + e.detail());
    }
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
  return backend;
}

std::vector<TokenDistribution> FileBackend::infer(const InferenceRequest& req) const {
  auto it = records_.find(Key{req.sample_id, req.resolution, req.aug_seed});
  if (it == records_.end()) {
    throw KeyMissing("no record for sample_id='" + req.sample_id +
                     "' resolution=" + std::to_string(req.resolution) +
                     " aug_seed=" + std::to_string(req.aug_seed));
  }
  return it->second;
}

// ---------------------------------------------------------------------------

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

struct HttpBackend::State {
  std::mutex mu;
  std::condition_variable cv;
  std::uint32_t inflight = 0;
};

namespace {

class InflightSlot {
 public:
  InflightSlot(std::mutex& mu, std::condition_variable& cv, std::uint32_t& inflight,
               std::uint32_t limit)
      : mu_(mu), cv_(cv), inflight_(inflight) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return inflight_ < limit; });
    ++inflight_;
  }
  ~InflightSlot() {
    {
      std::lock_guard lock(mu_);
      --inflight_;
    }
    cv_.notify_one();
  }
  InflightSlot(const InflightSlot&) = delete;
  InflightSlot& operator=(const InflightSlot&) = delete;

 private:
  std::mutex& mu_;
  std::condition_variable& cv_;
  std::uint32_t& inflight_;
};

}  // namespace

HttpBackend::HttpBackend(HttpBackendOptions options)
    : options_(std::move(options)), state_(std::make_unique<State>()) {
  static const std::regex kUrl(R"(^(https?://[^/\s:]+(:\d+)?)(/[^\s]*)?$)");
  std::smatch m;
  if (!std::regex_match(options_.endpoint, m, kUrl)) {
    throw InvalidArg("malformed endpoint URL '" + options_.endpoint + "'");
  }
  base_ = m[1].str();
  prefix_ = m[3].str();
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  if (options_.max_inflight == 0) throw InvalidArg("max_inflight must be >= 1");
}

HttpBackend::~HttpBackend() = default;

std::vector<TokenDistribution> HttpBackend::infer(const InferenceRequest& req) const {
  json body = {{"sample_id", req.sample_id},
               {"prompt", req.prompt},
               {"resolution", req.resolution},
               {"image_b64", req.image ? base64_encode(encode_png(*req.image)) : std::string()}};
  const std::string payload = body.dump();
  const std::string path = prefix_ + "/v1/distributions";

  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout);
  const time_t sec = static_cast<time_t>(timeout_us.count() / 1000000);
  const time_t usec = static_cast<time_t>(timeout_us.count() % 1000000);

  std::string last_error;
  auto delay = options_.backoff_base;
  for (std::uint32_t attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= options_.backoff_factor;
    }
    httplib::Result res{nullptr, httplib::Error::Unknown};
    {
      InflightSlot slot(state_->mu, state_->cv, state_->inflight, options_.max_inflight);
      httplib::Client client(base_);
      client.set_connection_timeout(sec, usec);
      client.set_read_timeout(sec, usec);
      client.set_write_timeout(sec, usec);
      res = client.Post(path, payload, "application/json");
    }
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("HTTP " + std::to_string(res->status) + " from " + base_ + path +
                         " for sample '" + req.sample_id + "'");
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      throw SchemaError(std::string("response is not JSON: ") + e.what(), ErrorClass::kBackend);
    }
    if (!reply.is_object() || !reply.contains("distributions")) {
      throw SchemaError("response lacks 'distributions'", ErrorClass::kBackend);
    }
    return parse_distributions(reply["distributions"], ErrorClass::kBackend);
  }
  throw BackendError("giving up on " + base_ + path + " for sample '" + req.sample_id +
                     "' after " + std::to_string(options_.retries + 1) +
                     " attempts: " + last_error);
}

// ---------------------------------------------------------------------------

ToyBackend::ToyBackend(ToyBackendOptions options) : options_(std::move(options)) {
  if (options_.vocab < 2) throw InvalidArg("toy backend vocab must be >= 2");
  if (options_.tokens < 1) throw InvalidArg("toy backend tokens must be >= 1");
}

double ToyBackend::score(const std::string& sample_id, const std::string& prompt,
                         std::uint32_t token, std::uint32_t vocab_index) {
  std::uint64_t h = fnv1a(sample_id);
  h = fnv1a(std::string_view("\x1f", 1), h);
  h = fnv1a(prompt, h);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(token) << 32 | vocab_index));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::vector<TokenDistribution> ToyBackend::infer(const InferenceRequest& req) const {
  auto it = options_.sharpness_per_res.find(req.resolution);
  if (it == options_.sharpness_per_res.end()) {
    throw InvalidArg("toy backend has no sharpness for resolution " +
                     std::to_string(req.resolution));
  }
  const double sharpness = it->second;
  std::vector<TokenDistribution> out(options_.tokens);
  std::vector<double> logits(options_.vocab);
  for (std::uint32_t t = 0; t < options_.tokens; ++t) {
    for (std::uint32_t j = 0; j < options_.vocab; ++j) {
      logits[j] = sharpness * score(req.sample_id, req.prompt, t, j);
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    auto& probs = out[t].probs;
    probs.resize(options_.vocab);
    double z = 0.0;
    for (std::uint32_t j = 0; j < options_.vocab; ++j) z += (probs[j] = std::exp(logits[j] - mx));
    for (auto& p : probs) p /= z;
  }
  return out;
}

}  // namespace taskreso
