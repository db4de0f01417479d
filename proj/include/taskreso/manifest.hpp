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
#include <filesystem>
#include <string>
#include <vector>

#include "taskreso/image.hpp"

namespace taskreso {

struct ManifestSample {
  std::string id;
  std::string image;  // relative to images_dir
  std::string prompt;
};

/// JSON shape:
///   {"task": str, "images_dir": str, "base_res": u32, "ext_res": u32,
///    "samples": [{"id": str, "image": str, "prompt": str}, ...]}
/// A relative images_dir is resolved against the manifest's directory.
struct TaskManifest {
  std::string task;
  std::filesystem::path images_dir;
  std::vector<ManifestSample> samples;
  std::uint32_t base_res = 336;
  std::uint32_t ext_res = 448;
};

/// Throws IoError or ManifestError (bad field, duplicate id, no samples).
TaskManifest load_manifest(const std::filesystem::path& path);

/// A decoded sample ready for scoring or inference.
struct TaskSample {
  std::string id;
  Image image;
  std::string prompt;
};

/// Decodes every referenced image in manifest order. Missing or unreadable
/// files raise ManifestError naming the sample id.
std::vector<TaskSample> load_samples(const TaskManifest& manifest);

}  // namespace taskreso
