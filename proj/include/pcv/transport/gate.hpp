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

#include <cmath>
#include <string>
#include <vector>

#include "pcv/core/png.hpp"
#include "pcv/transport/wire.hpp"

namespace pcv::transport {

struct GateViolation {
  std::string rule;  // "resolution", "reserved-bits", "confidence", "consistency"
  std::string detail;
};

struct GateReport {
  std::vector<GateViolation> violations;

  bool ok() const { return violations.empty(); }
  bool has(const std::string& rule) const {
    for (const auto& v : violations)
      if (v.rule == rule) return true;
    return false;
  }
  std::string summary() const {
    std::string s;
    for (const auto& v : violations) s += (s.empty() ? "" : "; ") + v.rule + ": " + v.detail;
    return s;
  }
};

// Structural checks run before a tuple may leave the edge. They cannot see
// semantics; leakage through content is measured by the audit tools.
inline GateReport privacy_gate(const RepresentationTuple& t, Size stream) {
  GateReport report;
  try {
    const RgbImage env = decode_png(t.env_png);
    if (env.size() != stream)
      report.violations.push_back({"resolution", "env image is " + std::to_string(env.width()) + "x" +
                                                     std::to_string(env.height()) + ", stream is " +
                                                     std::to_string(stream.width) + "x" +
                                                     std::to_string(stream.height)});
  } catch (const Error& e) {
    report.violations.push_back({"resolution", std::string("env image does not decode: ") + e.what()});
  }
  if (t.flags & kReservedFlags)
    report.violations.push_back({"reserved-bits", "flags byte is " + std::to_string(t.flags)});
  for (const auto& p : t.poses)
    for (std::size_t j = 0; j < p.pose.joints.size(); ++j) {
      const auto& k = p.pose.joints[j];
      if (!(k.rho >= 0.0f && k.rho <= 1.0f) || !std::isfinite(k.u) || !std::isfinite(k.v)) {
        report.violations.push_back({"confidence", "subject " + std::to_string(p.subject_id) + " joint " +
                                                       std::to_string(j) + " out of range"});
        break;
      }
    }
  if (!ids_consistent(t)) report.violations.push_back({"consistency", "pose and order subject ids differ"});
  return report;
}

}  // namespace pcv::transport
