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
#include <cstdint>
#include <map>
#include <vector>

#include "pcv/app/link.hpp"
#include "pcv/app/metrics.hpp"
#include "pcv/cloud/infer.hpp"
#include "pcv/edge/pipeline.hpp"
#include "pcv/sim/render.hpp"
#include "pcv/sim/scenarios.hpp"
#include "pcv/transport/wire.hpp"

namespace pcv::app {

// Edge output of one scripted scene, kept so the classifier can be re-run
// under different thresholds without re-rendering.
struct RecordedScene {
  sim::SceneSpec spec;
  bool has_sit = false;
  std::vector<transport::RepresentationTuple> tuples;  // env_png dropped
  std::vector<sim::GroundTruthFrame> truth;            // masks dropped
  std::vector<std::map<SubjectId, int>> subjects;
};

inline RecordedScene record_scene(const sim::SceneSpec& spec, const edge::EdgeConfig& cfg = {}) {
  RecordedScene r;
  r.spec = spec;
  for (const auto& a : spec.actors)
    for (const auto& seg : a.script) r.has_sit |= seg.action == sim::Action::kSit;
  const Size size{spec.width, spec.height};
  sim::SceneRenderer renderer(spec);
  edge::EdgeState state(size, cfg);
  for (int t = 0; t < spec.frame_count; ++t) {
    auto [frame, gt] = renderer.render(t);
    const auto out = edge::process_frame(frame, state, &gt);
    auto tuple = transport::decode(transport::encode(make_tuple(out, sync_key(0, t, 30))));
    tuple.env_png.clear();
    r.subjects.push_back(subject_actors(out, gt, size));
    for (auto& a : gt.actors) a.mask = Bitmap();
    r.truth.push_back(std::move(gt));
    r.tuples.push_back(std::move(tuple));
  }
  return r;
}

// The 20-scene mixed suite.
inline std::vector<RecordedScene> record_suite(std::uint64_t seed_base, int scenes = 20,
                                               const edge::EdgeConfig& cfg = {}) {
  std::vector<RecordedScene> out;
  for (int i = 0; i < scenes; ++i) out.push_back(record_scene(sim::behavior_suite_scene(i, seed_base), cfg));
  return out;
}

struct SuiteScores {
  LabelScores all;  // accuracy and fall recall over every scene
  LabelScores sit;  // false-fall rate over scenes that contain a sit
};

inline SuiteScores evaluate_suite(const std::vector<RecordedScene>& suite, const cloud::ClassifierConfig& cfg,
                                  int tolerance = 5) {
  std::vector<LabelRecord> all, sit;
  for (const auto& s : suite) {
    cloud::CloudSession session(cfg);
    std::vector<LabelRecord> rec;
    for (std::size_t t = 0; t < s.tuples.size(); ++t)
      record_labels(session.accept(s.tuples[t]), s.subjects[t], s.truth[t], s.spec, rec);
    if (s.has_sit) sit.insert(sit.end(), rec.begin(), rec.end());
    all.insert(all.end(), rec.begin(), rec.end());
  }
  return {score_labels(all, tolerance), score_labels(sit, tolerance)};
}

struct CalibrationTarget {
  double min_fall_recall = 0.95;
  double max_false_fall = 0.05;
};

struct Calibration {
  cloud::ClassifierConfig config;
  SuiteScores scores;
  bool feasible = false;  // some grid point met both targets
  int grid_points = 0;
};

// Grid search over the two fall thresholds, scored by fall recall minus the
// sit-scene false-fall rate. Ties go to the point nearest `base`, then to
// better overall accuracy. `feasible` records whether the winner meets `target`.
inline Calibration calibrate_fall_thresholds(const std::vector<RecordedScene>& suite,
                                             const cloud::ClassifierConfig& base = {},
                                             const CalibrationTarget& target = {}) {
  const double vy_grid[] = {0.04, 0.06, 0.08, 0.10, 0.12};
  const double spine_grid[] = {50, 55, 60, 65, 70};
  constexpr double kEps = 1e-12;
  Calibration best;
  double best_key = -1e9, best_acc = -1, best_dist = 1e9;
  for (double vy : vy_grid)
    for (double spine : spine_grid) {
      cloud::ClassifierConfig c = base;
      c.falling_vy = vy;
      c.fallen_spine_hold_deg = base.fallen_spine_hold_deg + (spine - base.fallen_spine_deg);
      c.fallen_spine_deg = spine;
      const auto s = evaluate_suite(suite, c);
      ++best.grid_points;
      const double key = s.all.fall_recall - s.sit.false_fall_rate;
      const double acc = s.all.accuracy;
      const double dist = std::abs(vy - base.falling_vy) / 0.02 + std::abs(spine - base.fallen_spine_deg) / 5;
      bool better = key > best_key + kEps;
      if (!better && std::abs(key - best_key) <= kEps)
        better = dist < best_dist - kEps || (std::abs(dist - best_dist) <= kEps && acc > best_acc + kEps);
      if (!better) continue;
      best.config = c;
      best.scores = s;
      best_key = key;
      best_acc = acc;
      best_dist = dist;
    }
  best.feasible = best.scores.all.fall_recall >= target.min_fall_recall &&
                  best.scores.sit.false_fall_rate <= target.max_false_fall;
  return best;
}

}  // namespace pcv::app
