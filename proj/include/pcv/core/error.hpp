// Copyright 2026 The PCV Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcv {

enum class ErrorKind {
  kValidation,
  kRange,
  kConfiguration,
  kCapability,
  kAssociation,
  kDegenerate,
  kProtocol,
  kVersion,
  kIntegrity,
  kStructure,
  kConsistency,
  kPrivacy,
  kIo,
  kPrecondition,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kCapability: return "unsupported-capability";
    case ErrorKind::kAssociation: return "association";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kVersion: return "version";
    case ErrorKind::kIntegrity: return "integrity";
    case ErrorKind::kStructure: return "structure";
    case ErrorKind::kConsistency: return "consistency";
    case ErrorKind::kPrivacy: return "privacy";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kPrecondition: return "precondition";
  }
  return "unknown";
}

// All library failures are reported through this type. `stage` is filled in
// by the edge pipeline so callers can tell which step rejected the frame.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string stage = {})
      : std::runtime_error(compose(kind, message, stage)),
        kind_(kind),
        detail_(message),
        stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& stage() const noexcept { return stage_; }

  Error with_stage(std::string stage) const {
    return Error(kind_, detail_, std::move(stage));
  }

 private:
  static std::string compose(ErrorKind kind, const std::string& message,
                             const std::string& stage) {
    std::string out;
    if (!stage.empty()) out += "[" + stage + "] ";
    out += std::string(to_string(kind)) + " error: " + message;
    return out;
  }

  ErrorKind kind_;
  std::string detail_;
  std::string stage_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace pcv
