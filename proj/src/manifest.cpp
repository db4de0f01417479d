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

#include "taskreso/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "taskreso/errors.hpp"

namespace taskreso {

using nlohmann::json;

namespace {

std::string require_string(const json& j, const char* field, const std::string& where) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    throw ManifestError(where + ": field '" + field + "' missing or not a string");
  }
  return it->get<std::string>();
}

}  // namespace

TaskManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ManifestError(path.string() + ": " + e.what());
  }
  const std::string where = path.string();
  if (!j.is_object()) throw ManifestError(where + ": manifest must be a JSON object");

  TaskManifest m;
  m.task = require_string(j, "task", where);
  std::filesystem::path dir = j.contains("images_dir") ? require_string(j, "images_dir", where)
                                                       : std::string(".");
  m.images_dir = dir.is_absolute() ? dir : path.parent_path() / dir;
  for (const char* field : {"base_res", "ext_res"}) {
    if (!j.contains(field)) continue;
    if (!j[field].is_number_unsigned() || j[field].get<std::uint64_t>() == 0 ||
        j[field].get<std::uint64_t>() > UINT32_MAX) {
      throw ManifestError(where + ": field '" + field + "' must be a positive integer");
    }
  }
  m.base_res = j.value("base_res", m.base_res);
  m.ext_res = j.value("ext_res", m.ext_res);

  auto samples = j.find("samples");
  if (samples == j.end() || !samples->is_array() || samples->empty()) {
    throw ManifestError(where + ": 'samples' must be a non-empty array");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < samples->size(); ++i) {
    const json& s = (*samples)[i];
    const std::string sw = where + ": samples[" + std::to_string(i) + "]";
    if (!s.is_object()) throw ManifestError(sw + " must be an object");
    ManifestSample ms{require_string(s, "id", sw), require_string(s, "image", sw),
                      s.contains("prompt") ? require_string(s, "prompt", sw) : std::string()};
    if (!seen.insert(ms.id).second) throw ManifestError(sw + ": duplicate sample id '" + ms.id + "'");
    m.samples.push_back(std::move(ms));
  }
  return m;
}

std::vector<TaskSample> load_samples(const TaskManifest& manifest) {
  std::vector<TaskSample> out;
  out.reserve(manifest.samples.size());
  for (const auto& s : manifest.samples) {
    const auto file = manifest.images_dir / s.image;
    if (!std::filesystem::exists(file)) {
      throw ManifestError("sample '" + s.id + "': image not found: " + file.string());
    }
    try {
      out.push_back({s.id, load_image(file), s.prompt});
    } catch (const Error& e) {
      throw ManifestError("sample '" + s.id + "': " + e.what());
    }
  }
  return out;
}

}  // namespace taskreso
