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

#include <stdexcept>
#include <string>

namespace taskreso {

/// Coarse failure class; the CLI maps each to an exit code.
enum class ErrorClass {
  kComputation,    // exit 1
  kConfiguration,  // exit 2
  kBackend,        // exit 3
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

#define TASKRESO_DEFINE_ERROR(Name, Cls)                           \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what)                         \
        : Error(ErrorClass::Cls, std::string(#Name ": ") + what) {} \
  }

TASKRESO_DEFINE_ERROR(InvalidArg, kComputation);
TASKRESO_DEFINE_ERROR(IoError, kConfiguration);
TASKRESO_DEFINE_ERROR(DecodeError, kConfiguration);
TASKRESO_DEFINE_ERROR(FormatError, kConfiguration);
TASKRESO_DEFINE_ERROR(ManifestError, kConfiguration);
TASKRESO_DEFINE_ERROR(NotDivisible, kConfiguration);
TASKRESO_DEFINE_ERROR(KeyMissing, kBackend);
TASKRESO_DEFINE_ERROR(BackendError, kBackend);
TASKRESO_DEFINE_ERROR(DegenerateUncertainty, kComputation);
TASKRESO_DEFINE_ERROR(DegenerateMean, kComputation);
TASKRESO_DEFINE_ERROR(InfeasibleTarget, kComputation);
TASKRESO_DEFINE_ERROR(CalibrationFailed, kComputation);

#undef TASKRESO_DEFINE_ERROR

/// Malformed record. Dump files raise it as a configuration problem, live
/// backends as a backend problem.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what,
                       ErrorClass cls = ErrorClass::kConfiguration)
      : Error(cls, "SchemaError: " + what), detail_(what) {}
  // Message without the class prefix, for re-wrapping with more context.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
};

}  // namespace taskreso
