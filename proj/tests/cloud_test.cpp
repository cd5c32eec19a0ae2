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

#include <gtest/gtest.h>

#include <cmath>

#include "pcv/app/link.hpp"
#include "pcv/cloud/behavior.hpp"
#include "pcv/cloud/infer.hpp"
#include "pcv/cloud/reconstruct.hpp"
#include "pcv/edge/pipeline.hpp"
#include "pcv/sim/render.hpp"
#include "pcv/sim/scenarios.hpp"

namespace pcv::cloud {
namespace {

using sim::Action;

KeypointSet gt_pose(const sim::SceneSpec& spec, int actor, int frame) {
  auto sp = sim::pose_at(spec.actors[actor], frame);
  KeypointSet kp = sp.keypoints;
  kp.head_yaw = sp.head_yaw;
  return kp;
}

sim::SceneSpec standing_scene(int frames = 10) {
  sim::SceneSpec s;
  s.frame_count = frames;
  sim::ActorSpec a;
  a.actor_id = "a";
  a.appearance = {{200, 30, 30}, {230, 180, 140}};
  a.height_px = 100;
  a.trajectory = {{0, {100, 220}}};
  a.script = {{0, frames, Action::kStand, {}}};
  s.actors.push_back(a);
  return s;
}

// ---------------------------------------------------------------- kinematics

TEST(Kinematics, StaticStandIsUprightAndStill) {
  const auto spec = standing_scene();
  std::vector<PoseSample> h;
  for (int t = 0; t < 5; ++t) h.push_back({std::uint64_t(t), gt_pose(spec, 0, t)});
  const auto f = extract_kinematics(h);
  EXPECT_NEAR(f.spine_angle, 0.0, 1e-9);
  EXPECT_NEAR(f.hip_vy, 0.0, 1e-12);
  EXPECT_NEAR(f.hip_vx, 0.0, 1e-12);
  EXPECT_NEAR(f.torso_len, 30.0, 1e-3);
}

TEST(Kinematics, FallEndpointIsHorizontal) {
  const auto spec = sim::behavior_scene(sim::ScriptKind::kFall, 5);
  const auto f = extract_kinematics({{89, gt_pose(spec, 0, 89)}});
  EXPECT_NEAR(f.spine_angle, 90.0, 1.0);
}

TEST(Kinematics, LinearHipTrackGivesExactSlope) {
  std::vector<PoseSample> h;
  const double vs[] = {100, 105, 110, 115, 120};
  for (int i = 0; i < 5; ++i) {
    KeypointSet kp;
    kp[Joint::kLeftHip] = {50, float(vs[i]), 1};
    kp[Joint::kRightHip] = {60, float(vs[i]), 1};
    kp[Joint::kLeftShoulder] = {50, float(vs[i] - 30), 1};
    kp[Joint::kRightShoulder] = {60, float(vs[i] - 30), 1};
    h.push_back({std::uint64_t(10 + i), kp});
  }
  EXPECT_EQ(extract_kinematics(h).hip_vy, 5.0);
}

TEST(Kinematics, WindowUsesOnlyTheLastFiveSamples) {
  std::vector<PoseSample> h;
  const double vs[] = {0, 0, 0, 100, 105, 110, 115, 120};
  for (int i = 0; i < 8; ++i) {
    KeypointSet kp;
    kp[Joint::kLeftHip] = {50, float(vs[i]), 1};
    kp[Joint::kLeftShoulder] = {50, float(vs[i] - 30), 1};
    h.push_back({std::uint64_t(i), kp});
  }
  EXPECT_DOUBLE_EQ(extract_kinematics(h).hip_vy, 5.0);
}

TEST(Kinematics, InvisibleSubjectIsDegenerate) {
  try {
    extract_kinematics({{0, KeypointSet{}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerate);
  }
}

// ---------------------------------------------------------------- classifier

KinematicFeatures features(double spine, double aspect, double vy = 0, double vx = 0) {
  KinematicFeatures f;
  f.spine_angle = spine;
  f.kp_bbox_aspect = aspect;
  f.hip_vy = vy;
  f.hip_vx = vx;
  f.torso_len = 30;
  f.hip_mid = {100, 150};
  f.knee_mid_v = 150 + 23;
  return f;
}

TEST(Classifier, UprightStillIsConfidentlyStanding) {
  const auto c = classify_behavior(features(0, 3.0), std::nullopt);
  EXPECT_EQ(c.label, BehaviorLabel::kStanding);
  EXPECT_GT(c.confidence, 0.9);
  // Frozen: logistic(4 * 1).
  EXPECT_NEAR(c.confidence, 0.98201379003790845, 1e-12);
}

TEST(Classifier, HorizontalFlatIsConfidentlyFallen) {
  const auto c = classify_behavior(features(90, 0.3), std::nullopt);
  EXPECT_EQ(c.label, BehaviorLabel::kFallen);
  EXPECT_GT(c.confidence, 0.9);
  // Frozen: logistic(4 * mean(0.5, 0.625)).
  EXPECT_NEAR(c.confidence, 0.90465053510089055, 1e-12);
}

TEST(Classifier, ExactlyOnAThresholdIsHalfConfidence) {
  const auto falling = classify_behavior(features(0, 3.0, 0.08 * 30), std::nullopt);
  EXPECT_EQ(falling.label, BehaviorLabel::kFalling);
  EXPECT_DOUBLE_EQ(falling.confidence, 0.5);
  const auto standing = classify_behavior(features(20, 3.0), std::nullopt);
  EXPECT_EQ(standing.label, BehaviorLabel::kStanding);
  EXPECT_DOUBLE_EQ(standing.confidence, 0.5);
  const auto fallen = classify_behavior(features(60, 0.8), std::nullopt);
  EXPECT_EQ(fallen.label, BehaviorLabel::kFallen);
  EXPECT_DOUBLE_EQ(fallen.confidence, 0.5);
}

TEST(Classifier, DecisionListOrder) {
  EXPECT_EQ(classify_behavior(features(0, 3.0, 5), std::nullopt).label, BehaviorLabel::kFalling);
  EXPECT_EQ(classify_behavior(features(0, 3.0, 0, 1.0), std::nullopt).label, BehaviorLabel::kWalking);
  EXPECT_EQ(classify_behavior(features(25, 3.0), std::nullopt).label, BehaviorLabel::kUnknown);
  auto sit = features(5, 1.2);
  sit.knee_mid_v = 152;
  EXPECT_EQ(classify_behavior(sit, std::nullopt).label, BehaviorLabel::kSitting);
  auto raise = features(0, 3.0);
  raise.wrist_above_nose = 10;
  EXPECT_EQ(classify_behavior(raise, std::nullopt).label, BehaviorLabel::kRaisingArm);
}

TEST(Classifier, FallenHoldsWithHysteresis) {
  const auto f = features(55, 0.5);
  EXPECT_NE(classify_behavior(f, std::nullopt).label, BehaviorLabel::kFallen);
  EXPECT_NE(classify_behavior(f, BehaviorLabel::kStanding).label, BehaviorLabel::kFallen);
  EXPECT_EQ(classify_behavior(f, BehaviorLabel::kFallen).label, BehaviorLabel::kFallen);
}

TEST(Classifier, UnknownIsHalfConfidence) {
  const auto c = classify_behavior(features(45, 2.0), std::nullopt);
  EXPECT_EQ(c.label, BehaviorLabel::kUnknown);
  EXPECT_EQ(c.confidence, 0.5);
}

TEST(Classifier, LabelNamesRoundTrip) {
  for (BehaviorLabel l : kAllLabels) EXPECT_EQ(parse_label(to_string(l)), l);
}

// --------------------------------------------------------------------- infer

struct Run {
  std::vector<transport::RepresentationTuple> tuples;
  std::vector<AnonymizedComposite> composites;
  std::vector<sim::GroundTruthFrame> gt;
};

Run run_edge(const sim::SceneSpec& spec, int frames = -1) {
  if (frames < 0) frames = spec.frame_count;
  sim::SceneRenderer r(spec);
  edge::EdgeState state(spec.size(), {});
  Run run;
  for (int t = 0; t < frames; ++t) {
    auto [frame, gt] = r.render(t);
    const auto out = edge::process_frame(frame, state, &gt);
    run.tuples.push_back(app::make_tuple(out, app::sync_key(3, t, 30)));
    run.composites.push_back(out.composite);
    run.gt.push_back(std::move(gt));
  }
  return run;
}

TEST(Infer, EmptyWindowIsPreconditionError) {
  try {
    infer({}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPrecondition);
  }
}

TEST(Infer, NoSubjectsGivesEmptyReportWithKey) {
  transport::RepresentationTuple t;
  t.key = {4, 9, 300000};
  const auto r = infer({&t}, {});
  EXPECT_EQ(r.key, t.key);
  EXPECT_TRUE(r.entries.empty());
}

TEST(Infer, FallScriptGoesStandingFallingFallen) {
  const auto spec = sim::behavior_scene(sim::ScriptKind::kFall, 7);
  const auto run = run_edge(spec);
  CloudSession session;
  std::vector<BehaviorLabel> seq;
  for (const auto& t : run.tuples) {
    const auto r = session.accept(t);
    ASSERT_EQ(r.entries.size(), 1u);
    if (seq.empty() || seq.back() != r.entries[0].label) seq.push_back(r.entries[0].label);
  }
  EXPECT_EQ(seq, (std::vector<BehaviorLabel>{BehaviorLabel::kStanding, BehaviorLabel::kFalling,
                                             BehaviorLabel::kFallen}));
}

TEST(Infer, StandingAndSittingSubjectsAreTold) {
  sim::SceneSpec spec = standing_scene(60);
  sim::ActorSpec b = spec.actors[0];
  b.actor_id = "b";
  b.appearance = {{30, 200, 30}, {120, 80, 60}};
  b.trajectory = {{0, {220, 220}}};
  b.script = {{0, 60, Action::kSit, 20}};
  spec.actors.push_back(b);
  const auto run = run_edge(spec);
  CloudSession session;
  BehaviorReport last;
  for (const auto& t : run.tuples) last = session.accept(t);
  ASSERT_EQ(last.entries.size(), 2u);
  // Tracker ids follow gt actor order: 1 = standing, 2 = sitting.
  EXPECT_EQ(last.entries[0].label, BehaviorLabel::kStanding);
  EXPECT_EQ(last.entries[1].label, BehaviorLabel::kSitting);
  for (const auto& e : last.entries) {
    EXPECT_GE(e.confidence, 0.0);
    EXPECT_LE(e.confidence, 1.0);
  }
}

TEST(Infer, ReportBoxIsKeypointExtentPlusTenPercent) {
  const auto run = run_edge(standing_scene(1));
  const auto r = infer({&run.tuples[0]}, {});
  const auto kb = *run.tuples[0].poses[0].pose.visible_bounds();
  EXPECT_NEAR(r.entries[0].box.w, kb.w * 1.1, 1e-9);
  EXPECT_NEAR(r.entries[0].box.h, kb.h * 1.1, 1e-9);
  EXPECT_NEAR(r.entries[0].box.cx(), kb.cx(), 1e-9);
}

// ------------------------------------------------------------- reconstruction

TEST(Reconstruct, EmptyPosesGiveTransparentCanvas) {
  const auto layer = render_proxy_cloud({}, {}, {40, 30});
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) ASSERT_EQ(layer.at(x, y).a, 0);
}

TEST(Reconstruct, TransparentLayerIsIdentity) {
  RgbImage env(40, 30);
  env.fill({9, 8, 7});
  env.set(3, 3, {1, 1, 1});
  EXPECT_EQ(reconstruct(env, RgbaImage(40, 30)).raster, env);
}

TEST(Reconstruct, DimensionMismatchIsValidationError) {
  EXPECT_THROW(reconstruct(RgbImage(4, 4), RgbaImage(4, 5)), Error);
}

TEST(Reconstruct, CloudProxiesMatchEdgeProxies) {
  const auto spec = sim::three_actor_scene(60);
  sim::SceneRenderer r(spec);
  edge::EdgeState state(spec.size(), {});
  for (int t = 0; t < 60; ++t) {
    auto [frame, gt] = r.render(t);
    const auto out = edge::process_frame(frame, state, &gt);
    for (std::size_t i = 0; i < out.poses.size(); ++i) {
      const auto box = keypoint_box(out.poses[i].pose).value();
      const auto cloud = edge::render_proxy(out.poses[i].pose, box, spec.size(), out.poses[i].subject_id);
      ASSERT_EQ(cloud, out.proxies[i]) << "frame " << t;
    }
  }
}

TEST(Reconstruct, LaterSubjectOwnsTheOverlap) {
  const auto spec = sim::crossing_scene();
  auto [frame, gt] = sim::SceneRenderer(spec).render(spec.frame_count / 2);
  std::vector<SubjectPose> poses{{1, gt.actors[0].keypoints}, {2, gt.actors[1].keypoints}};
  const auto a = render_proxy_cloud(poses, {1, 2}, spec.size());
  const auto b = render_proxy_cloud(poses, {2, 1}, spec.size());
  const auto only1 = render_proxy_cloud({poses[0]}, {1}, spec.size());
  const auto only2 = render_proxy_cloud({poses[1]}, {2}, spec.size());
  int overlap = 0;
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      if (only1.at(x, y).a == 0 || only2.at(x, y).a == 0) continue;
      ++overlap;
      ASSERT_EQ(a.at(x, y), only2.at(x, y));
      ASSERT_EQ(b.at(x, y), only1.at(x, y));
    }
  EXPECT_GT(overlap, 0);
}

TEST(Reconstruct, MatchesEdgeCompositeAndUsesOnlyThePalette) {
  const auto spec = sim::three_actor_scene(90);
  const auto run = run_edge(spec);
  CloudSession session;
  for (std::size_t t = 0; t < run.tuples.size(); ++t) {
    const auto wire = transport::decode(transport::encode(run.tuples[t]));
    const auto cf = process_tuple(session, wire);
    ASSERT_EQ(cf.scene.raster, run.composites[t].image) << "frame " << t;
    const RgbImage env = decode_png(wire.env_png);
    const RgbaImage layer = render_proxy_cloud(wire.poses, wire.order, env.size());
    for (int y = 0; y < env.height(); ++y)
      for (int x = 0; x < env.width(); ++x) {
        const Rgb c = cf.scene.raster.at(x, y);
        if (layer.at(x, y).a == 0) {
          ASSERT_EQ(c, env.at(x, y));
        } else {
          ASSERT_TRUE(c == kProxyFill || c == kProxyOutline);
        }
      }
  }
}

}  // namespace
}  // namespace pcv::cloud
