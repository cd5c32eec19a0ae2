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

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcv/audit/attack.hpp"
#include "pcv/audit/independence.hpp"
#include "pcv/audit/leak.hpp"

namespace pcv::audit {

struct LeakFrame {
  std::uint64_t frame_id = 0;
  LeakScanResult scan;
};

struct AuditBounds {
  double attack_margin = 0.05;
  double control_min = 0.95;
  double leak_threshold = kLeakThreshold;
};

// Any section may be absent; a report passes when every present section does.
struct AuditReport {
  std::optional<IndependenceResult> independence;
  std::optional<AttackResult> attack;
  std::vector<LeakFrame> leak_scan;
  AuditBounds bounds;

  double leak_peak() const {
    double p = 0;
    for (const auto& f : leak_scan)
      if (f.scan.patches > 0) p = std::max(p, f.scan.peak);
    return p;
  }
  bool independence_ok() const { return !independence || independence->passed(); }
  bool attack_ok() const { return !attack || attack->passed(bounds.attack_margin, bounds.control_min); }
  bool leak_ok() const { return leak_peak() < bounds.leak_threshold; }
  bool passed() const { return independence_ok() && attack_ok() && leak_ok(); }
};

inline nlohmann::json to_json(const IndependenceResult& r) {
  return {{"trials", r.trials},
          {"failures", r.failures},
          {"failed_trials", r.failed_trials},
          {"coverage_min", r.min_coverage},
          {"coverage_max", r.max_coverage},
          {"passed", r.passed()}};
}

inline nlohmann::json to_json(const AttackOutcome& o) {
  nlohmann::json channels = nlohmann::json::object();
  for (const auto& c : o.channels)
    channels[std::string(to_string(c.channel))] = {{"correct", c.correct}, {"accuracy", c.accuracy}};
  return {{"accuracy", o.accuracy},
          {"best_channel", std::string(to_string(o.best))},
          {"ci95", {o.ci_low, o.ci_high}},
          {"channels", channels}};
}

inline nlohmann::json to_json(const AttackResult& r, const AuditBounds& b = {}) {
  return {{"gallery_size", r.gallery_size},
          {"probes", r.probes},
          {"chance", r.chance},
          {"bound", r.chance + b.attack_margin},
          {"tuples", to_json(r.tuples)},
          {"control", to_json(r.control)},
          {"control_valid", r.valid(b.control_min)},
          {"passed", r.passed(b.attack_margin, b.control_min)}};
}

inline nlohmann::json to_json(const AuditReport& r) {
  nlohmann::json j;
  if (r.independence) j["independence"] = to_json(*r.independence);
  if (r.attack) j["identity_attack"] = to_json(*r.attack, r.bounds);
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : r.leak_scan)
    frames.push_back({{"frame_id", f.frame_id},
                      {"peak", f.scan.peak},
                      {"x", f.scan.x},
                      {"y", f.scan.y},
                      {"patches", f.scan.patches}});
  j["leak_scan"] = {{"threshold", r.bounds.leak_threshold},
                    {"peak", r.leak_peak()},
                    {"passed", r.leak_ok()},
                    {"frames", frames}};
  j["passed"] = r.passed();
  return j;
}

}  // namespace pcv::audit
