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

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "taskreso/complexity.hpp"
#include "taskreso/selector.hpp"
#include "taskreso/uncertainty.hpp"

namespace taskreso {

using Json = nlohmann::json;

/// Reads a JSON file; throws IoError, or SchemaError on a parse failure.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const Json& j, const std::filesystem::path& path);

/// {"task": str, "C": f64, "V": f64, "per_sample_C": [f64]?, "per_sample_V": [f64]?}
TaskStats task_stats_from_json(const Json& j);
Json task_stats_to_json(const TaskStats& s);

/// Accepts a single task object, an array of them, or {"tasks": [...]}.
std::vector<TaskStats> read_task_stats(const std::filesystem::path& path);

/// Array (or {"references": [...]}) of task-stats objects with "target".
std::vector<ReferenceTask> read_references(const std::filesystem::path& path);

/// {"min_raw": f64, "max_raw": f64, "source_count": u32}
ReferenceBounds bounds_from_json(const Json& j);
Json bounds_to_json(const ReferenceBounds& b);

}  // namespace taskreso
