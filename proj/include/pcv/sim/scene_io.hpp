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
#include <string>

#include "json.hpp"
#include "pcv/core/error.hpp"
#include "pcv/sim/render.hpp"

namespace pcv::sim {

using json = nlohmann::json;

namespace io_detail {

inline Rgb rgb_from(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3)
    fail(ErrorKind::kValidation, field + ": expected [r, g, b]");
  auto ch = [&](int i) {
    const int v = j.at(i).get<int>();
    if (v < 0 || v > 255) fail(ErrorKind::kValidation, field + ": channel out of [0,255]");
    return static_cast<std::uint8_t>(v);
  };
  return {ch(0), ch(1), ch(2)};
}

inline json rgb_to(Rgb c) { return json::array({c.r, c.g, c.b}); }

}  // namespace io_detail

// Scene config schema (JSON):
//   { "width": 320, "height": 240, "frame_count": 100, "seed": 1,
//     "background": { "kind": "flat|checker|gradient", "color_a": [r,g,b],
//                     "color_b": [r,g,b], "cell": 16, "direction": "vertical|horizontal" },
//     "actors": [ { "actor_id": "a", "clothing": [r,g,b], "skin": [r,g,b],
//                   "height_px": 100,
//                   "trajectory": [ {"frame": 0, "x": 80, "y": 200}, ... ],
//                   "script": [ {"begin": 0, "end": 40, "action": "stand"},
//                               {"begin": 40, "end": 100, "action": "fall",
//                                "transition_frames": 12} ] } ] }
inline SceneSpec scene_from_json(const json& j) {
  using io_detail::rgb_from;
  try {
    SceneSpec s;
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.frame_count = j.at("frame_count").get<int>();
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("background")) {
      const auto& b = j.at("background");
      const std::string kind = b.value("kind", "flat");
      if (kind == "flat") s.background.kind = BackgroundKind::kFlat;
      else if (kind == "checker") s.background.kind = BackgroundKind::kChecker;
      else if (kind == "gradient") s.background.kind = BackgroundKind::kGradient;
      else fail(ErrorKind::kValidation, "background.kind: unknown kind '" + kind + "'");
      if (b.contains("color_a")) s.background.color_a = rgb_from(b.at("color_a"), "background.color_a");
      if (b.contains("color_b")) s.background.color_b = rgb_from(b.at("color_b"), "background.color_b");
      s.background.cell = b.value("cell", 16);
      s.background.vertical = b.value("direction", std::string("vertical")) != "horizontal";
    }
    for (const auto& a : j.value("actors", json::array())) {
      ActorSpec actor;
      actor.actor_id = a.at("actor_id").get<std::string>();
      actor.appearance.clothing = rgb_from(a.at("clothing"), "clothing");
      actor.appearance.skin = rgb_from(a.at("skin"), "skin");
      actor.height_px = a.at("height_px").get<double>();
      for (const auto& w : a.at("trajectory"))
        actor.trajectory.push_back({w.at("frame").get<int>(), {w.at("x").get<double>(), w.at("y").get<double>()}});
      for (const auto& seg : a.at("script")) {
        ActionSegment sg;
        sg.begin = seg.at("begin").get<int>();
        sg.end = seg.at("end").get<int>();
        sg.action = parse_action(seg.at("action").get<std::string>());
        if (seg.contains("transition_frames")) sg.transition_frames = seg.at("transition_frames").get<int>();
        actor.script.push_back(sg);
      }
      s.actors.push_back(std::move(actor));
    }
    return s;
  } catch (const json::exception& e) {
    fail(ErrorKind::kValidation, std::string("scene config: ") + e.what());
  }
}

inline json scene_to_json(const SceneSpec& s) {
  using io_detail::rgb_to;
  json j;
  j["width"] = s.width;
  j["height"] = s.height;
  j["frame_count"] = s.frame_count;
  j["seed"] = s.seed;
  const char* kinds[] = {"flat", "checker", "gradient"};
  j["background"] = {{"kind", kinds[static_cast<int>(s.background.kind)]},
                     {"color_a", rgb_to(s.background.color_a)},
                     {"color_b", rgb_to(s.background.color_b)},
                     {"cell", s.background.cell},
                     {"direction", s.background.vertical ? "vertical" : "horizontal"}};
  j["actors"] = json::array();
  for (const auto& a : s.actors) {
    json ja;
    ja["actor_id"] = a.actor_id;
    ja["clothing"] = rgb_to(a.appearance.clothing);
    ja["skin"] = rgb_to(a.appearance.skin);
    ja["height_px"] = a.height_px;
    ja["trajectory"] = json::array();
    for (const auto& w : a.trajectory)
      ja["trajectory"].push_back({{"frame", w.frame}, {"x", w.pos.x}, {"y", w.pos.y}});
    ja["script"] = json::array();
    for (const auto& sg : a.script) {
      json js = {{"begin", sg.begin}, {"end", sg.end}, {"action", to_string(sg.action)}};
      if (sg.transition_frames) js["transition_frames"] = *sg.transition_frames;
      ja["script"].push_back(js);
    }
    j["actors"].push_back(ja);
  }
  return j;
}

inline SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::kIo, "cannot open scene config " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::kValidation, "scene config " + path.string() + ": " + e.what());
  }
  return scene_from_json(j);
}

// Run-length encoding of a mask in row-major order, starting with a run of
// zeros (possibly empty).
inline json mask_rle(const Bitmap& m) {
  json runs = json::array();
  std::uint8_t cur = 0;
  std::size_t run = 0;
  for (auto b : m.bits()) {
    if (b != cur) {
      runs.push_back(run);
      run = 0;
      cur = b;
    }
    ++run;
  }
  runs.push_back(run);
  return runs;
}

// One JSON-lines record per frame.
inline json ground_truth_record(const GroundTruthFrame& gt) {
  json rec;
  rec["frame"] = gt.frame_idx;
  rec["actors"] = json::array();
  for (const auto& a : gt.actors) {
    json ja;
    ja["actor_id"] = a.actor_id;
    ja["box"] = {a.box.x, a.box.y, a.box.w, a.box.h};
    ja["head_yaw"] = a.head_yaw;
    ja["action"] = to_string(a.action);
    ja["keypoints"] = json::array();
    for (const auto& k : a.keypoints.joints) ja["keypoints"].push_back({k.u, k.v, k.rho});
    ja["mask_area"] = a.mask.count();
    ja["mask_rle"] = mask_rle(a.mask);
    rec["actors"].push_back(ja);
  }
  return rec;
}

}  // namespace pcv::sim
