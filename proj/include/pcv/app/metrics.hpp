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

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "pcv/cloud/behavior.hpp"
#include "pcv/cloud/infer.hpp"
#include "pcv/edge/detect.hpp"
#include "pcv/edge/pipeline.hpp"
#include "pcv/sim/render.hpp"
#include "pcv/sim/scene.hpp"

namespace pcv::app {

// Whether a predicted label agrees with the simulator action. Both fall
// labels count for a scripted fall.
inline bool label_matches(sim::Action gt, cloud::BehaviorLabel label) {
  using cloud::BehaviorLabel;
  switch (gt) {
    case sim::Action::kStand: return label == BehaviorLabel::kStanding;
    case sim::Action::kWalk: return label == BehaviorLabel::kWalking;
    case sim::Action::kSit: return label == BehaviorLabel::kSitting;
    case sim::Action::kFall: return label == BehaviorLabel::kFalling || label == BehaviorLabel::kFallen;
    case sim::Action::kRaiseArm: return label == BehaviorLabel::kRaisingArm;
  }
  return false;
}

inline bool is_fall_label(cloud::BehaviorLabel l) {
  return l == cloud::BehaviorLabel::kFalling || l == cloud::BehaviorLabel::kFallen;
}

// One scored (frame, actor) pair.
struct LabelRecord {
  int frame = 0;
  std::string actor_id;
  sim::Action truth = sim::Action::kStand;
  cloud::BehaviorLabel predicted = cloud::BehaviorLabel::kUnknown;
  int frames_from_transition = 1 << 20;  // distance to the nearest change of gt action
};

// Subject id -> gt actor index for one edge frame, by box association.
inline std::map<SubjectId, int> subject_actors(const edge::EdgeOutput& out, const sim::GroundTruthFrame& gt,
                                               Size size) {
  std::map<SubjectId, int> m;
  for (const auto& t : out.tracks) {
    if (!t.matched()) continue;
    const int a = edge::associate(t.box.clipped(size), gt);
    if (a >= 0) m[t.subject_id] = a;
  }
  return m;
}

// Frames between `frame` and the closest boundary where the actor's scripted
// action changes.
inline int distance_to_transition(const sim::ActorSpec& actor, int frame) {
  int best = 1 << 20;
  for (std::size_t i = 1; i < actor.script.size(); ++i)
    if (actor.script[i].action != actor.script[i - 1].action)
      best = std::min(best, std::abs(frame - actor.script[i].begin));
  return best;
}

// Collects scored pairs for one report.
inline void record_labels(const cloud::BehaviorReport& report, const std::map<SubjectId, int>& subjects,
                          const sim::GroundTruthFrame& gt, const sim::SceneSpec& spec,
                          std::vector<LabelRecord>& out) {
  for (const auto& e : report.entries) {
    auto it = subjects.find(e.subject_id);
    if (it == subjects.end()) continue;
    const auto& actor = gt.actors[it->second];
    const auto spec_it = std::find_if(spec.actors.begin(), spec.actors.end(),
                                      [&](const sim::ActorSpec& a) { return a.actor_id == actor.actor_id; });
    LabelRecord r;
    r.frame = gt.frame_idx;
    r.actor_id = actor.actor_id;
    r.truth = actor.action;
    r.predicted = e.label;
    if (spec_it != spec.actors.end()) r.frames_from_transition = distance_to_transition(*spec_it, gt.frame_idx);
    out.push_back(r);
  }
}

struct LabelScores {
  int scored = 0;
  int correct = 0;
  double accuracy = 1.0;  // 1.0 on zero scored pairs

  int fall_frames = 0;  // gt fall frames outside the tolerance band
  int fall_hits = 0;
  double fall_recall = 1.0;

  int non_fall_frames = 0;  // other gt frames outside the tolerance band
  int false_falls = 0;
  double false_fall_rate = 0.0;
};

// Frame-by-frame accuracy over all pairs, and fall recall / false-fall rate
// over pairs at least `tolerance + 1` frames away from an action change.
inline LabelScores score_labels(const std::vector<LabelRecord>& records, int tolerance = 5) {
  LabelScores s;
  for (const auto& r : records) {
    ++s.scored;
    s.correct += label_matches(r.truth, r.predicted);
    if (r.frames_from_transition <= tolerance) continue;
    if (r.truth == sim::Action::kFall) {
      ++s.fall_frames;
      s.fall_hits += is_fall_label(r.predicted);
    } else {
      ++s.non_fall_frames;
      s.false_falls += is_fall_label(r.predicted);
    }
  }
  if (s.scored > 0) s.accuracy = double(s.correct) / s.scored;
  if (s.fall_frames > 0) s.fall_recall = double(s.fall_hits) / s.fall_frames;
  if (s.non_fall_frames > 0) s.false_fall_rate = double(s.false_falls) / s.non_fall_frames;
  return s;
}

}  // namespace pcv::app
