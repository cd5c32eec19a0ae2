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

// Seeded scene builders shared by the tests, the audit and the CLI.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pcv/sim/render.hpp"

namespace pcv::sim {

enum class ScriptKind {
  kStandOnly,
  kFall,
  kWalkThenFall,
  kSit,
  kWalkThenSit,
  kStandWalkStand,
};

inline std::string_view to_string(ScriptKind k) {
  switch (k) {
    case ScriptKind::kStandOnly: return "stand";
    case ScriptKind::kFall: return "fall";
    case ScriptKind::kWalkThenFall: return "walk_fall";
    case ScriptKind::kSit: return "sit";
    case ScriptKind::kWalkThenSit: return "walk_sit";
    case ScriptKind::kStandWalkStand: return "stand_walk_stand";
  }
  return "stand";
}

namespace scenario_detail {

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}
inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace scenario_detail

// Single-actor behaviour scene. Falls use 8-14 frame transitions, sits 20-30.
inline SceneSpec behavior_scene(ScriptKind kind, std::uint64_t seed, int frame_count = 90,
                                Size size = {320, 240}) {
  using namespace scenario_detail;
  std::mt19937_64 rng(seed);
  SceneSpec spec;
  spec.width = size.width;
  spec.height = size.height;
  spec.frame_count = frame_count;
  spec.seed = seed;
  spec.background.kind = BackgroundKind::kGradient;
  spec.background.color_a = {static_cast<std::uint8_t>(uniform_int(rng, 90, 140)), 120, 110};
  spec.background.color_b = {170, static_cast<std::uint8_t>(uniform_int(rng, 150, 200)), 160};

  ActorSpec a;
  a.actor_id = "actor0";
  a.appearance.clothing = {static_cast<std::uint8_t>(uniform_int(rng, 0, 60)),
                           static_cast<std::uint8_t>(uniform_int(rng, 30, 90)),
                           static_cast<std::uint8_t>(uniform_int(rng, 150, 255))};
  a.appearance.skin = {224, 172, 105};
  a.height_px = uniform_real(rng, 80, 105);

  const double ground_y = uniform_real(rng, a.height_px + 12, size.height - 0.1 * a.height_px - 2);
  const double fall_room = 1.05 * a.height_px;
  const double x_lo = 0.2 * a.height_px + 4;
  const double x_hi = size.width - fall_room - 4;
  const double speed = uniform_real(rng, 1.2, 2.2);

  const int t1 = uniform_int(rng, 20, 35);  // first transition
  const int walk_len = uniform_int(rng, 20, 30);
  double x0 = uniform_real(rng, x_lo, x_hi);

  auto walk_span = [&](int begin, int end) {
    // Walk toward whichever side has more room, staying fall-safe.
    const double dist = speed * (end - begin);
    double x1 = x0 + dist;
    if (x1 > x_hi) x1 = std::max(x_lo, x0 - dist);
    a.trajectory = {{begin, {x0, ground_y}}, {end, {x1, ground_y}}};
  };

  a.trajectory = {{0, {x0, ground_y}}};
  switch (kind) {
    case ScriptKind::kStandOnly:
      a.script = {{0, frame_count, Action::kStand, {}}};
      break;
    case ScriptKind::kFall:
      a.script = {{0, t1, Action::kStand, {}},
                  {t1, frame_count, Action::kFall, uniform_int(rng, 8, 14)}};
      break;
    case ScriptKind::kWalkThenFall: {
      walk_span(0, walk_len);
      const int t2 = walk_len + uniform_int(rng, 10, 20);
      a.script = {{0, walk_len, Action::kWalk, {}},
                  {walk_len, t2, Action::kStand, {}},
                  {t2, frame_count, Action::kFall, uniform_int(rng, 8, 14)}};
      break;
    }
    case ScriptKind::kSit:
      a.script = {{0, t1, Action::kStand, {}},
                  {t1, frame_count, Action::kSit, uniform_int(rng, 20, 30)}};
      break;
    case ScriptKind::kWalkThenSit: {
      walk_span(0, walk_len);
      const int t2 = walk_len + uniform_int(rng, 10, 20);
      a.script = {{0, walk_len, Action::kWalk, {}},
                  {walk_len, t2, Action::kStand, {}},
                  {t2, frame_count, Action::kSit, uniform_int(rng, 20, 30)}};
      break;
    }
    case ScriptKind::kStandWalkStand: {
      const int t2 = t1 + walk_len;
      walk_span(t1, t2);
      a.script = {{0, t1, Action::kStand, {}},
                  {t1, t2, Action::kWalk, {}},
                  {t2, frame_count, Action::kStand, {}}};
      break;
    }
  }
  spec.actors.push_back(std::move(a));
  return spec;
}

// Mixed behaviour suite: `index` picks the script kind round-robin so any 20
// consecutive indices contain falls, sits and walks.
inline SceneSpec behavior_suite_scene(int index, std::uint64_t seed_base) {
  static constexpr ScriptKind kinds[] = {ScriptKind::kFall, ScriptKind::kSit,
                                         ScriptKind::kWalkThenFall, ScriptKind::kWalkThenSit,
                                         ScriptKind::kStandWalkStand};
  return behavior_scene(kinds[index % 5], seed_base + static_cast<std::uint64_t>(index));
}

// Two actors walking toward each other at different depths; their boxes
// overlap while they pass.
inline SceneSpec crossing_scene(int frame_count = 120, Size size = {320, 240}) {
  SceneSpec spec;
  spec.width = size.width;
  spec.height = size.height;
  spec.frame_count = frame_count;
  spec.background.kind = BackgroundKind::kChecker;
  spec.background.color_a = {150, 150, 140};
  spec.background.color_b = {120, 125, 130};
  spec.background.cell = 20;

  ActorSpec a;
  a.actor_id = "left_to_right";
  a.appearance = {{200, 40, 40}, {230, 180, 140}};
  a.height_px = 100;
  a.trajectory = {{0, {40, 225}}, {frame_count - 1, {size.width - 40.0, 225}}};
  a.script = {{0, frame_count, Action::kWalk, {}}};

  ActorSpec b;
  b.actor_id = "right_to_left";
  b.appearance = {{40, 60, 200}, {120, 80, 60}};
  b.height_px = 85;
  b.trajectory = {{0, {size.width - 40.0, 190}}, {frame_count - 1, {40, 190}}};
  b.script = {{0, frame_count, Action::kWalk, {}}};

  spec.actors = {a, b};
  return spec;
}

// Three actors with mixed activity: a walker crossing the others, a sitter
// and a faller.
inline SceneSpec three_actor_scene(int frame_count = 300, Size size = {320, 240}) {
  SceneSpec spec;
  spec.width = size.width;
  spec.height = size.height;
  spec.frame_count = frame_count;
  spec.seed = 3;
  spec.background.kind = BackgroundKind::kGradient;
  spec.background.color_a = {100, 110, 130};
  spec.background.color_b = {180, 170, 150};

  const int third = frame_count / 3;
  ActorSpec walker;
  walker.actor_id = "walker";
  walker.appearance = {{220, 60, 30}, {235, 190, 150}};
  walker.height_px = 80;
  walker.trajectory = {{0, {30, 230}}, {frame_count / 2, {290, 230}}, {frame_count - 1, {30, 230}}};
  walker.script = {{0, frame_count, Action::kWalk, {}}};

  ActorSpec sitter;
  sitter.actor_id = "sitter";
  sitter.appearance = {{40, 160, 70}, {140, 95, 70}};
  sitter.height_px = 70;
  sitter.trajectory = {{0, {70, 175}}};
  sitter.script = {{0, third, Action::kStand, {}},
                   {third, frame_count, Action::kSit, 25}};

  ActorSpec faller;
  faller.actor_id = "faller";
  faller.appearance = {{60, 60, 190}, {200, 150, 110}};
  faller.height_px = 72;
  faller.trajectory = {{0, {170, 190}}};
  faller.script = {{0, third, Action::kStand, {}},
                   {third, 2 * third, Action::kRaiseArm, 15},
                   {2 * third, frame_count, Action::kFall, 12}};

  spec.actors = {walker, sitter, faller};
  return spec;
}

// N appearances with pairwise channel distance >= 64 (clothing and skin).
inline std::vector<Appearance> distinct_appearances(int n, std::uint64_t seed) {
  using namespace scenario_detail;
  std::mt19937_64 rng(seed);
  std::vector<Appearance> out;
  auto random_rgb = [&] {
    return Rgb{static_cast<std::uint8_t>(uniform_int(rng, 0, 255)),
               static_cast<std::uint8_t>(uniform_int(rng, 0, 255)),
               static_cast<std::uint8_t>(uniform_int(rng, 0, 255))};
  };
  int guard = 0;
  while (static_cast<int>(out.size()) < n) {
    require(++guard < 100000, ErrorKind::kValidation, "cannot place distinct appearances");
    Appearance a{random_rgb(), random_rgb()};
    bool ok = true;
    for (const auto& o : out)
      ok = ok && channel_distance(o.clothing, a.clothing) >= 64 && channel_distance(o.skin, a.skin) >= 64;
    if (ok) out.push_back(a);
  }
  return out;
}

// Short single-actor scene with a random pose script at a random place, used
// for identity enrolment and probing. Height and background are fixed so that
// appearance is the only thing distinguishing actors.
inline SceneSpec identity_scene(const std::string& actor_id, const Appearance& look, std::uint64_t seed,
                                int frame_count = 8, Size size = {320, 240}) {
  using namespace scenario_detail;
  std::mt19937_64 rng(seed);
  SceneSpec spec;
  spec.width = size.width;
  spec.height = size.height;
  spec.frame_count = frame_count;
  spec.seed = seed;
  spec.background.kind = BackgroundKind::kGradient;
  spec.background.color_a = {110, 120, 125};
  spec.background.color_b = {170, 165, 150};

  ActorSpec a;
  a.actor_id = actor_id;
  a.appearance = look;
  a.height_px = 90;
  const double x = uniform_real(rng, 40, size.width - 40);
  const double y = uniform_real(rng, 110, size.height - 8);
  static constexpr Action choices[] = {Action::kStand, Action::kWalk, Action::kRaiseArm, Action::kSit};
  const Action act = choices[uniform_int(rng, 0, 3)];
  if (act == Action::kWalk) {
    const double dx = uniform_real(rng, -2, 2) * frame_count;
    const double x1 = std::clamp(x + dx, 40.0, size.width - 40.0);
    a.trajectory = {{0, {x, y}}, {frame_count - 1, {x1, y}}};
  } else {
    a.trajectory = {{0, {x, y}}};
  }
  a.script = {{0, frame_count, act, {}}};
  spec.actors.push_back(std::move(a));
  return spec;
}

}  // namespace pcv::sim
