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

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "pcv/cloud/behavior.hpp"
#include "pcv/core/error.hpp"
#include "pcv/edge/pipeline.hpp"
#include "pcv/sim/scenarios.hpp"
#include "pcv/sim/scene_io.hpp"
#include "pcv/transport/reorder.hpp"
#include "pcv/transport/stream.hpp"

namespace pcv::app {

using json = nlohmann::json;

enum class TransportKind { kInProcess, kSocket, kFile };

inline std::string_view to_string(TransportKind k) {
  switch (k) {
    case TransportKind::kInProcess: return "in_process";
    case TransportKind::kSocket: return "socket";
    case TransportKind::kFile: return "file";
  }
  return "in_process";
}

struct TransportConfig {
  TransportKind kind = TransportKind::kInProcess;
  std::string address = "127.0.0.1:7700";
  std::string path;  // packet record file; empty means <out_dir>/packets.bin
};

struct AuditConfig {
  int independence_trials = 10000;
  int attack_actors = 8;
  int attack_probes = 400;  // 0 skips the identity attack
  int enrollment_scenes = 4;
  int frames_per_scene = 8;
  bool leak_scan = true;
  double attack_margin = 0.05;
  double control_min = 0.95;
  double leak_threshold = 0.9;
};

struct RunConfig {
  // Scene source, in priority order: inline spec, spec file, built-in scenario.
  std::optional<sim::SceneSpec> scene;
  std::string scene_path;
  std::string scenario = "three_actor";

  std::uint64_t seed = 1;
  std::uint32_t camera_id = 0;
  double fps = 30;
  std::filesystem::path out_dir = "out";

  edge::EdgeConfig edge;
  cloud::ClassifierConfig classifier;
  transport::ReorderConfig reorder;
  TransportConfig transport;
  AuditConfig audit;
  AuditConfig e2e_audit{200, 8, 0, 4, 8, true};

  bool unsafe_dump_raw = false;
  int inject_gate_violation_at = -1;  // test hook; negative disables
};

inline constexpr std::string_view kScenarios[] = {"three_actor", "crossing", "empty",
                                                  "stand",       "fall",     "sit",
                                                  "walk_fall",   "walk_sit", "stand_walk_stand"};

namespace config_detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  require(j.is_object(), ErrorKind::kValidation, where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    require(ok.count(k) > 0, ErrorKind::kValidation, where + ": unknown key '" + k + "'");
}

template <typename T>
void read(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

inline void in_range(bool ok, const std::string& name, const std::string& range) {
  require(ok, ErrorKind::kValidation, name + " must be " + range);
}

}  // namespace config_detail

// Range checks on every threshold.
inline void validate(const RunConfig& c) {
  using config_detail::in_range;
  in_range(c.fps > 0, "fps", "> 0");
  const auto& e = c.edge;
  in_range(e.background_alpha > 0 && e.background_alpha <= 1, "edge.background_alpha", "in (0, 1]");
  in_range(e.noise_sigma >= 0, "edge.noise_sigma", ">= 0");
  in_range(e.embedding_noise_sigma >= 0, "edge.embedding_noise_sigma", ">= 0");
  in_range(e.tracker.iou_threshold > 0 && e.tracker.iou_threshold <= 1, "edge.tracker.iou_threshold", "in (0, 1]");
  in_range(e.tracker.max_misses >= 0, "edge.tracker.max_misses", ">= 0");
  in_range(e.tracker.velocity_alpha >= 0 && e.tracker.velocity_alpha <= 1, "edge.tracker.velocity_alpha",
           "in [0, 1]");
  in_range(e.detector.bootstrap_frames >= 1, "edge.detector.bootstrap_frames", ">= 1");
  in_range(e.detector.diff_threshold >= 0 && e.detector.diff_threshold <= 255, "edge.detector.diff_threshold",
           "in [0, 255]");
  in_range(e.detector.dilation >= 0, "edge.detector.dilation", ">= 0");
  in_range(e.detector.min_box_area >= 0, "edge.detector.min_box_area", ">= 0");
  in_range(e.detector.alpha > 0 && e.detector.alpha <= 1, "edge.detector.alpha", "in (0, 1]");
  in_range(e.proxy.bone_width_fraction > 0, "edge.proxy.bone_width_fraction", "> 0");
  in_range(e.proxy.min_bone_radius >= 0, "edge.proxy.min_bone_radius", ">= 0");

  const auto& k = c.classifier;
  in_range(k.window >= 1, "classifier.window", ">= 1");
  for (auto [name, v] : std::initializer_list<std::pair<const char*, double>>{{"classifier.falling_vy", k.falling_vy},
                         {"classifier.fallen_aspect", k.fallen_aspect},
                         {"classifier.sitting_hip_knee", k.sitting_hip_knee},
                         {"classifier.raising_arm_wrist", k.raising_arm_wrist},
                         {"classifier.walking_vx", k.walking_vx},
                         {"classifier.confidence_gain", k.confidence_gain}})
    in_range(v > 0, name, "> 0");
  for (auto [name, v] : std::initializer_list<std::pair<const char*, double>>{{"classifier.fallen_spine_deg", k.fallen_spine_deg},
                         {"classifier.fallen_spine_hold_deg", k.fallen_spine_hold_deg},
                         {"classifier.sitting_spine_deg", k.sitting_spine_deg},
                         {"classifier.standing_spine_deg", k.standing_spine_deg}})
    in_range(v > 0 && v <= 180, name, "in (0, 180]");

  in_range(c.reorder.capacity >= 1, "reorder.capacity", ">= 1");
  in_range(c.reorder.gap_timeout.count() >= 0, "reorder.gap_timeout_ms", ">= 0");

  for (const auto* a : {&c.audit, &c.e2e_audit}) {
    in_range(a->independence_trials >= 0, "audit.independence_trials", ">= 0");
    in_range(a->attack_actors >= 2, "audit.attack_actors", ">= 2");
    in_range(a->attack_probes >= 0, "audit.attack_probes", ">= 0");
    in_range(a->enrollment_scenes >= 1, "audit.enrollment_scenes", ">= 1");
    in_range(a->frames_per_scene >= 1, "audit.frames_per_scene", ">= 1");
    in_range(a->control_min >= 0 && a->control_min <= 1, "audit.control_min", "in [0, 1]");
  }
  if (c.transport.kind == TransportKind::kSocket) transport::parse_endpoint(c.transport.address);

  if (!c.scene && !c.scene_path.empty())
    require(std::filesystem::exists(c.scene_path), ErrorKind::kValidation,
            "scene file '" + c.scene_path + "' does not exist");
  if (!c.scene && c.scene_path.empty()) {
    bool known = false;
    for (auto s : kScenarios) known = known || s == c.scenario;
    require(known, ErrorKind::kValidation, "unknown scenario '" + c.scenario + "'");
  }
}

inline AuditConfig audit_from_json(const json& j, AuditConfig a, const std::string& where) {
  using namespace config_detail;
  check_keys(j, where,
             {"independence_trials", "attack_actors", "attack_probes", "enrollment_scenes", "frames_per_scene",
              "leak_scan", "attack_margin", "control_min", "leak_threshold"});
  read(j, "independence_trials", a.independence_trials);
  read(j, "attack_actors", a.attack_actors);
  read(j, "attack_probes", a.attack_probes);
  read(j, "enrollment_scenes", a.enrollment_scenes);
  read(j, "frames_per_scene", a.frames_per_scene);
  read(j, "leak_scan", a.leak_scan);
  read(j, "attack_margin", a.attack_margin);
  read(j, "control_min", a.control_min);
  read(j, "leak_threshold", a.leak_threshold);
  return a;
}

inline json audit_to_json(const AuditConfig& a) {
  return {{"independence_trials", a.independence_trials}, {"attack_actors", a.attack_actors},
          {"attack_probes", a.attack_probes},             {"enrollment_scenes", a.enrollment_scenes},
          {"frames_per_scene", a.frames_per_scene},       {"leak_scan", a.leak_scan},
          {"attack_margin", a.attack_margin},             {"control_min", a.control_min},
          {"leak_threshold", a.leak_threshold}};
}

// Reads a config document. Relative paths resolve against `base_dir`.
// Missing keys keep their defaults; unknown keys are rejected.
inline RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  using namespace config_detail;
  RunConfig c;
  try {
    check_keys(j, "config",
               {"scene", "scenario", "mode", "seed", "camera_id", "fps", "out_dir", "edge", "classifier", "reorder",
                "transport", "audit", "e2e_audit", "debug"});
    if (j.contains("scene")) {
      const auto& s = j.at("scene");
      if (s.is_string()) {
        std::filesystem::path p = s.get<std::string>();
        c.scene_path = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
      } else {
        c.scene = sim::scene_from_json(s);
      }
    }
    read(j, "scenario", c.scenario);
    if (j.contains("mode")) c.edge.mode = parse_mode(j.at("mode").get<std::string>());
    read(j, "seed", c.seed);
    read(j, "camera_id", c.camera_id);
    read(j, "fps", c.fps);
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();

    if (j.contains("edge")) {
      const auto& e = j.at("edge");
      check_keys(e, "edge", {"background_alpha", "noise_sigma", "embedding_noise_sigma", "tracker", "detector", "proxy"});
      read(e, "background_alpha", c.edge.background_alpha);
      read(e, "noise_sigma", c.edge.noise_sigma);
      read(e, "embedding_noise_sigma", c.edge.embedding_noise_sigma);
      if (e.contains("tracker")) {
        const auto& t = e.at("tracker");
        check_keys(t, "edge.tracker", {"iou_threshold", "max_misses", "velocity_alpha"});
        read(t, "iou_threshold", c.edge.tracker.iou_threshold);
        read(t, "max_misses", c.edge.tracker.max_misses);
        read(t, "velocity_alpha", c.edge.tracker.velocity_alpha);
      }
      if (e.contains("detector")) {
        const auto& d = e.at("detector");
        check_keys(d, "edge.detector", {"bootstrap_frames", "diff_threshold", "dilation", "min_box_area", "alpha"});
        read(d, "bootstrap_frames", c.edge.detector.bootstrap_frames);
        read(d, "diff_threshold", c.edge.detector.diff_threshold);
        read(d, "dilation", c.edge.detector.dilation);
        read(d, "min_box_area", c.edge.detector.min_box_area);
        read(d, "alpha", c.edge.detector.alpha);
      }
      if (e.contains("proxy")) {
        const auto& p = e.at("proxy");
        check_keys(p, "edge.proxy", {"bone_width_fraction", "min_bone_radius", "subject_tags"});
        read(p, "bone_width_fraction", c.edge.proxy.bone_width_fraction);
        read(p, "min_bone_radius", c.edge.proxy.min_bone_radius);
        read(p, "subject_tags", c.edge.proxy.subject_tags);
      }
    }
    if (j.contains("classifier")) {
      const auto& k = j.at("classifier");
      check_keys(k, "classifier",
                 {"window", "falling_vy", "fallen_spine_deg", "fallen_spine_hold_deg", "fallen_aspect",
                  "sitting_hip_knee", "sitting_spine_deg", "raising_arm_wrist", "walking_vx", "standing_spine_deg",
                  "confidence_gain"});
      read(k, "window", c.classifier.window);
      read(k, "falling_vy", c.classifier.falling_vy);
      read(k, "fallen_spine_deg", c.classifier.fallen_spine_deg);
      read(k, "fallen_spine_hold_deg", c.classifier.fallen_spine_hold_deg);
      read(k, "fallen_aspect", c.classifier.fallen_aspect);
      read(k, "sitting_hip_knee", c.classifier.sitting_hip_knee);
      read(k, "sitting_spine_deg", c.classifier.sitting_spine_deg);
      read(k, "raising_arm_wrist", c.classifier.raising_arm_wrist);
      read(k, "walking_vx", c.classifier.walking_vx);
      read(k, "standing_spine_deg", c.classifier.standing_spine_deg);
      read(k, "confidence_gain", c.classifier.confidence_gain);
    }
    if (j.contains("reorder")) {
      const auto& r = j.at("reorder");
      check_keys(r, "reorder", {"capacity", "gap_frames", "gap_timeout_ms"});
      read(r, "capacity", c.reorder.capacity);
      read(r, "gap_frames", c.reorder.gap_frames);
      if (r.contains("gap_timeout_ms")) c.reorder.gap_timeout = std::chrono::milliseconds(r.at("gap_timeout_ms").get<long>());
    }
    if (j.contains("transport")) {
      const auto& t = j.at("transport");
      check_keys(t, "transport", {"kind", "address", "path"});
      if (t.contains("kind")) {
        const auto k = t.at("kind").get<std::string>();
        if (k == "in_process") c.transport.kind = TransportKind::kInProcess;
        else if (k == "socket") c.transport.kind = TransportKind::kSocket;
        else if (k == "file") c.transport.kind = TransportKind::kFile;
        else fail(ErrorKind::kValidation, "transport.kind: unknown kind '" + k + "'");
      }
      read(t, "address", c.transport.address);
      read(t, "path", c.transport.path);
    }
    if (j.contains("audit")) c.audit = audit_from_json(j.at("audit"), c.audit, "audit");
    if (j.contains("e2e_audit")) c.e2e_audit = audit_from_json(j.at("e2e_audit"), c.e2e_audit, "e2e_audit");
    if (j.contains("debug")) {
      const auto& d = j.at("debug");
      check_keys(d, "debug", {"unsafe_dump_raw", "inject_gate_violation_at"});
      read(d, "unsafe_dump_raw", c.unsafe_dump_raw);
      read(d, "inject_gate_violation_at", c.inject_gate_violation_at);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kValidation, std::string("config: ") + e.what());
  }
  c.edge.seed = c.seed;
  validate(c);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::kIo, "cannot open config " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::kValidation, "config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

// Effective configuration, for the run summary.
inline json config_to_json(const RunConfig& c) {
  json j;
  if (c.scene) j["scene"] = sim::scene_to_json(*c.scene);
  else if (!c.scene_path.empty()) j["scene"] = c.scene_path;
  j["scenario"] = c.scenario;
  j["mode"] = to_string(c.edge.mode);
  j["seed"] = c.seed;
  j["camera_id"] = c.camera_id;
  j["fps"] = c.fps;
  j["out_dir"] = c.out_dir.string();
  const auto& e = c.edge;
  j["edge"] = {{"background_alpha", e.background_alpha},
               {"noise_sigma", e.noise_sigma},
               {"embedding_noise_sigma", e.embedding_noise_sigma},
               {"tracker",
                {{"iou_threshold", e.tracker.iou_threshold},
                 {"max_misses", e.tracker.max_misses},
                 {"velocity_alpha", e.tracker.velocity_alpha}}},
               {"detector",
                {{"bootstrap_frames", e.detector.bootstrap_frames},
                 {"diff_threshold", e.detector.diff_threshold},
                 {"dilation", e.detector.dilation},
                 {"min_box_area", e.detector.min_box_area},
                 {"alpha", e.detector.alpha}}},
               {"proxy",
                {{"bone_width_fraction", e.proxy.bone_width_fraction},
                 {"min_bone_radius", e.proxy.min_bone_radius},
                 {"subject_tags", e.proxy.subject_tags}}}};
  const auto& k = c.classifier;
  j["classifier"] = {{"window", k.window},
                     {"falling_vy", k.falling_vy},
                     {"fallen_spine_deg", k.fallen_spine_deg},
                     {"fallen_spine_hold_deg", k.fallen_spine_hold_deg},
                     {"fallen_aspect", k.fallen_aspect},
                     {"sitting_hip_knee", k.sitting_hip_knee},
                     {"sitting_spine_deg", k.sitting_spine_deg},
                     {"raising_arm_wrist", k.raising_arm_wrist},
                     {"walking_vx", k.walking_vx},
                     {"standing_spine_deg", k.standing_spine_deg},
                     {"confidence_gain", k.confidence_gain}};
  j["reorder"] = {{"capacity", c.reorder.capacity},
                  {"gap_frames", c.reorder.gap_frames},
                  {"gap_timeout_ms", c.reorder.gap_timeout.count()}};
  j["transport"] = {{"kind", to_string(c.transport.kind)}, {"address", c.transport.address}, {"path", c.transport.path}};
  j["audit"] = audit_to_json(c.audit);
  j["e2e_audit"] = audit_to_json(c.e2e_audit);
  j["debug"] = {{"unsafe_dump_raw", c.unsafe_dump_raw}, {"inject_gate_violation_at", c.inject_gate_violation_at}};
  return j;
}

// Scene described by the config.
inline sim::SceneSpec resolve_scene(const RunConfig& c) {
  if (c.scene) return *c.scene;
  if (!c.scene_path.empty()) return sim::load_scene(c.scene_path);
  const std::string& s = c.scenario;
  if (s == "three_actor") return sim::three_actor_scene();
  if (s == "crossing") return sim::crossing_scene();
  if (s == "empty") {
    auto spec = sim::three_actor_scene(30);
    spec.actors.clear();
    return spec;
  }
  using sim::ScriptKind;
  for (ScriptKind k : {ScriptKind::kStandOnly, ScriptKind::kFall, ScriptKind::kSit, ScriptKind::kWalkThenFall,
                       ScriptKind::kWalkThenSit, ScriptKind::kStandWalkStand})
    if (sim::to_string(k) == s) return sim::behavior_scene(k, c.seed);
  fail(ErrorKind::kValidation, "unknown scenario '" + s + "'");
}

}  // namespace pcv::app
