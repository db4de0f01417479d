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

#include "taskreso/json_io.hpp"

#include <fstream>

#include "taskreso/errors.hpp"

namespace taskreso {

namespace {

double number_field(const Json& j, const char* field, const std::string& where) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_number()) {
    throw SchemaError(where + ": field '" + field + "' missing or not a number");
  }
  return it->get<double>();
}

std::vector<double> number_list(const Json& j, const char* field, const std::string& where) {
  std::vector<double> out;
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) throw SchemaError(where + ": field '" + field + "' must be an array");
  out.reserve(it->size());
  for (const Json& v : *it) {
    if (!v.is_number()) throw SchemaError(where + ": field '" + field + "' holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

const Json& unwrap_list(const Json& j, const char* key) {
  if (j.is_object() && j.contains(key)) return j.at(key);
  return j;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

TaskStats task_stats_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("task stats entry must be an object");
  auto name = j.find("task");
  if (name == j.end() || !name->is_string()) {
    throw SchemaError("task stats: field 'task' missing or not a string");
  }
  const std::string where = "task '" + name->get<std::string>() + "'";
  TaskStats s;
  s.task = name->get<std::string>();
  s.c = number_field(j, "C", where);
  s.v = number_field(j, "V", where);
  s.per_sample_c = number_list(j, "per_sample_C", where);
  s.per_sample_v = number_list(j, "per_sample_V", where);
  try {
    s.validate();
  } catch (const InvalidArg& e) {
    throw SchemaError(e.what());
  }
  return s;
}

Json task_stats_to_json(const TaskStats& s) {
  Json j = {{"task", s.task}, {"C", s.c}, {"V", s.v}};
  if (!s.per_sample_c.empty()) j["per_sample_C"] = s.per_sample_c;
  if (!s.per_sample_v.empty()) j["per_sample_V"] = s.per_sample_v;
  return j;
}

std::vector<TaskStats> read_task_stats(const std::filesystem::path& path) {
  const Json root = read_json_file(path);
  const Json& list = unwrap_list(root, "tasks");
  std::vector<TaskStats> out;
  try {
    if (list.is_array()) {
      for (const Json& j : list) out.push_back(task_stats_from_json(j));
    } else {
      out.push_back(task_stats_from_json(list));
    }
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.detail());
  }
  if (out.empty()) throw SchemaError(path.string() + ": no tasks");
  return out;
}

std::vector<ReferenceTask> read_references(const std::filesystem::path& path) {
  const Json root = read_json_file(path);
  const Json& list = unwrap_list(root, "references");
  if (!list.is_array() || list.empty()) {
    throw SchemaError(path.string() + ": expected a non-empty array of references");
  }
  std::vector<ReferenceTask> out;
  for (const Json& j : list) {
    try {
      ReferenceTask r;
      r.stats = task_stats_from_json(j);
      auto t = j.find("target");
      if (t == j.end() || !t->is_number_unsigned()) {
        throw SchemaError("reference '" + r.stats.task + "': field 'target' missing or not a positive integer");
      }
      r.target = t->get<std::uint32_t>();
      out.push_back(std::move(r));
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ": " + e.detail());
    }
  }
  return out;
}

ReferenceBounds bounds_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("reference bounds must be an object");
  ReferenceBounds b;
  b.min_raw = number_field(j, "min_raw", "bounds");
  b.max_raw = number_field(j, "max_raw", "bounds");
  if (auto it = j.find("source_count"); it != j.end()) {
    if (!it->is_number_unsigned()) throw SchemaError("bounds: 'source_count' must be an unsigned integer");
    b.source_count = it->get<std::uint32_t>();
  }
  if (b.min_raw > b.max_raw) throw SchemaError("bounds: min_raw exceeds max_raw");
  return b;
}

Json bounds_to_json(const ReferenceBounds& b) {
  return {{"min_raw", b.min_raw}, {"max_raw", b.max_raw}, {"source_count", b.source_count}};
}

}  // namespace taskreso
