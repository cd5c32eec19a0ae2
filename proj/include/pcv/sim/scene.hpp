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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/core/image.hpp"
#include "pcv/core/skeleton.hpp"

namespace pcv::sim {

enum class Action { kStand, kWalk, kSit, kFall, kRaiseArm };

inline std::string_view to_string(Action a) {
  switch (a) {
    case Action::kStand: return "stand";
    case Action::kWalk: return "walk";
    case Action::kSit: return "sit";
    case Action::kFall: return "fall";
    case Action::kRaiseArm: return "raise_arm";
  }
  return "stand";
}

inline Action parse_action(std::string_view s) {
  if (s == "stand") return Action::kStand;
  if (s == "walk") return Action::kWalk;
  if (s == "sit") return Action::kSit;
  if (s == "fall") return Action::kFall;
  if (s == "raise_arm") return Action::kRaiseArm;
  fail(ErrorKind::kValidation, "unknown action '" + std::string(s) + "'");
}

// Half-open frame range [begin, end). Transitional actions (sit, fall,
// raise_arm) interpolate over the first `transition_frames` frames of the
// range and hold the end pose afterwards; unset means the whole range.
struct ActionSegment {
  int begin = 0;
  int end = 0;
  Action action = Action::kStand;
  std::optional<int> transition_frames;
};

struct Waypoint {
  int frame = 0;
  Point2 pos;  // ground contact point (ankle midpoint at floor level)
};

struct Appearance {
  Rgb clothing;
  Rgb skin;
  friend bool operator==(const Appearance&, const Appearance&) = default;
};

struct ActorSpec {
  std::string actor_id;
  Appearance appearance;
  double height_px = 100;
  std::vector<Waypoint> trajectory;
  std::vector<ActionSegment> script;
};

enum class BackgroundKind { kFlat, kChecker, kGradient };

struct BackgroundSpec {
  BackgroundKind kind = BackgroundKind::kFlat;
  Rgb color_a{128, 128, 128};
  Rgb color_b{200, 200, 200};
  int cell = 16;          // checker cell size
  bool vertical = true;   // gradient direction
};

struct SceneSpec {
  int width = 320;
  int height = 240;
  int frame_count = 1;
  BackgroundSpec background;
  std::vector<ActorSpec> actors;
  std::uint64_t seed = 0;

  Size size() const { return {width, height}; }
};

inline constexpr int kMaxActors = 16;
inline constexpr int kMinDimension = 64;

// Body proportions, as fractions of height_px. x grows to the actor's left
// (image right when facing the camera), y grows upward from the floor.
namespace body {
inline constexpr std::array<Point2, kNumJoints> kCanonical = {{
    {0.00, 0.900},   // nose
    {0.02, 0.915},   // left eye
    {-0.02, 0.915},  // right eye
    {0.04, 0.900},   // left ear
    {-0.04, 0.900},  // right ear
    {0.11, 0.800},   // left shoulder
    {-0.11, 0.800},  // right shoulder
    {0.13, 0.640},   // left elbow
    {-0.13, 0.640},  // right elbow
    {0.14, 0.500},   // left wrist
    {-0.14, 0.500},  // right wrist
    {0.06, 0.500},   // left hip
    {-0.06, 0.500},  // right hip
    {0.055, 0.270},  // left knee
    {-0.055, 0.270}, // right knee
    {0.05, 0.030},   // left ankle
    {-0.05, 0.030},  // right ankle
}};
inline constexpr double kHeadRadius = 0.065;
inline constexpr Point2 kHeadCentre{0.0, 0.905};
inline constexpr double kTorsoRadius = 0.09;
inline constexpr double kArmRadius = 0.03;
inline constexpr double kLegRadius = 0.038;
inline constexpr double kWalkPeriod = 24.0;  // frames per gait cycle
inline constexpr double kWalkLegSwing = 0.35;  // radians
inline constexpr double kWalkArmSwing = 0.30;
inline constexpr Point2 kLyingHipMid{0.45, 0.06};
inline constexpr double kSitKneeSpread = 0.09;
}  // namespace body

// Range of frames the actor's script covers.
inline int script_length(const ActorSpec& actor) {
  int n = 0;
  for (const auto& s : actor.script) n = std::max(n, s.end);
  return n;
}

inline const ActionSegment* segment_at(const ActorSpec& actor, int frame) {
  for (const auto& s : actor.script)
    if (frame >= s.begin && frame < s.end) return &s;
  return nullptr;
}

inline Point2 ground_point(const ActorSpec& actor, double frame) {
  const auto& tr = actor.trajectory;
  if (tr.empty()) return {};
  if (frame <= tr.front().frame) return tr.front().pos;
  if (frame >= tr.back().frame) return tr.back().pos;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    if (frame <= tr[i].frame) {
      const double t = (frame - tr[i - 1].frame) / double(tr[i].frame - tr[i - 1].frame);
      return lerp(tr[i - 1].pos, tr[i].pos, t);
    }
  }
  return tr.back().pos;
}

// Progress through a transitional segment, 0 at begin, 1 at the end of the
// transition (the last frame of the range by default).
inline double segment_progress(const ActionSegment& seg, int frame) {
  const int span = seg.transition_frames ? *seg.transition_frames : seg.end - seg.begin;
  if (span <= 1) return 1.0;
  return std::clamp((frame - seg.begin) / double(span - 1), 0.0, 1.0);
}

namespace detail {

inline Point2 rotate(Point2 p, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return {p.x * c - p.y * s, p.x * s + p.y * c};
}

// Two-link chain from `root` to `tip`; returns the middle joint, bending
// toward +y (upward) so knees never dip below the line.
inline Point2 solve_two_link(Point2 root, Point2 tip, double l1, double l2) {
  const Point2 d = tip - root;
  double dist = d.norm();
  if (dist < 1e-9) return root + Point2{0, l1};
  dist = std::min(dist, l1 + l2 - 1e-9);
  const double a = (l1 * l1 - l2 * l2 + dist * dist) / (2 * dist);
  const double h = std::sqrt(std::max(0.0, l1 * l1 - a * a));
  const Point2 u = d * (1.0 / d.norm());
  const Point2 base = root + u * a;
  Point2 n{-u.y, u.x};
  if (n.y < 0) n = n * -1.0;
  return base + n * h;
}

// Joint positions in body units (y up) for one frame.
inline std::array<Point2, kNumJoints> body_pose(const ActionSegment& seg, int frame) {
  using body::kCanonical;
  std::array<Point2, kNumJoints> j = kCanonical;
  const double s = segment_progress(seg, frame);
  switch (seg.action) {
    case Action::kStand:
      break;
    case Action::kWalk: {
      const double phase = 2 * kPi * frame / body::kWalkPeriod;
      const double leg = body::kWalkLegSwing * std::sin(phase);
      const double arm = body::kWalkArmSwing * std::sin(phase);
      auto swing = [&](Joint root, Joint a, Joint b, double angle) {
        const Point2 r = j[idx(root)];
        j[idx(a)] = r + rotate(kCanonical[idx(a)] - r, angle);
        j[idx(b)] = r + rotate(kCanonical[idx(b)] - r, angle);
      };
      swing(Joint::kLeftHip, Joint::kLeftKnee, Joint::kLeftAnkle, leg);
      swing(Joint::kRightHip, Joint::kRightKnee, Joint::kRightAnkle, -leg);
      swing(Joint::kLeftShoulder, Joint::kLeftElbow, Joint::kLeftWrist, -arm);
      swing(Joint::kRightShoulder, Joint::kRightElbow, Joint::kRightWrist, arm);
      // Keep the lower ankle on the floor.
      const double lift = std::min(j[idx(Joint::kLeftAnkle)].y, j[idx(Joint::kRightAnkle)].y) -
                          kCanonical[idx(Joint::kLeftAnkle)].y;
      for (auto& p : j) p.y -= lift;
      break;
    }
    case Action::kSit: {
      const double knee_y = kCanonical[idx(Joint::kLeftKnee)].y;
      const double hip_y = kCanonical[idx(Joint::kLeftHip)].y;
      const double drop = (hip_y - knee_y) * s;
      for (int k = 0; k <= idx(Joint::kRightHip); ++k) j[k].y -= drop;
      const double spread = kCanonical[idx(Joint::kLeftKnee)].x +
                            (body::kSitKneeSpread - kCanonical[idx(Joint::kLeftKnee)].x) * s;
      j[idx(Joint::kLeftKnee)].x = spread;
      j[idx(Joint::kRightKnee)].x = -spread;
      break;
    }
    case Action::kFall: {
      // Spine rotates linearly from vertical to horizontal (toward +x). The
      // hips drop linearly and slide sideways on a cubic ease-in, so the
      // collapse starts straight down. The feet stay planted.
      const double theta = s * kPi / 2;
      const Point2 hip0 = midpoint(kCanonical[idx(Joint::kLeftHip)], kCanonical[idx(Joint::kRightHip)]);
      const Point2 hip1 = body::kLyingHipMid;
      const Point2 hip{hip0.x + (hip1.x - hip0.x) * s * s * s, hip0.y + (hip1.y - hip0.y) * s};
      for (int k = 0; k <= idx(Joint::kRightHip); ++k)
        j[k] = hip + rotate(kCanonical[k] - hip0, -theta);
      for (auto [h, kn, an] : {std::tuple{Joint::kLeftHip, Joint::kLeftKnee, Joint::kLeftAnkle},
                               std::tuple{Joint::kRightHip, Joint::kRightKnee, Joint::kRightAnkle}}) {
        const double l1 = (kCanonical[idx(kn)] - kCanonical[idx(h)]).norm();
        const double l2 = (kCanonical[idx(an)] - kCanonical[idx(kn)]).norm();
        j[idx(kn)] = solve_two_link(j[idx(h)], j[idx(an)], l1, l2);
      }
      break;
    }
    case Action::kRaiseArm: {
      const double phi = s * kPi;
      const Point2 r = j[idx(Joint::kLeftShoulder)];
      j[idx(Joint::kLeftElbow)] = r + rotate(kCanonical[idx(Joint::kLeftElbow)] - r, phi);
      j[idx(Joint::kLeftWrist)] = r + rotate(kCanonical[idx(Joint::kLeftWrist)] - r, phi);
      break;
    }
  }
  return j;
}

}  // namespace detail

// Scripted skeletal pose of `actor` at `frame_idx`, in image coordinates,
// together with its head yaw (radians, 0 = facing the camera).
struct ScriptedPose {
  KeypointSet keypoints;
  float head_yaw = 0;
  Action action = Action::kStand;
};

inline ScriptedPose pose_at(const ActorSpec& actor, int frame_idx) {
  const int n = script_length(actor);
  if (frame_idx < 0 || frame_idx >= n)
    fail(ErrorKind::kRange, "frame " + std::to_string(frame_idx) + " outside script of actor '" +
                                actor.actor_id + "' (" + std::to_string(n) + " frames)");
  const ActionSegment* seg = segment_at(actor, frame_idx);
  require(seg != nullptr, ErrorKind::kValidation, "script gap at frame " + std::to_string(frame_idx));

  const auto body_units = detail::body_pose(*seg, frame_idx);
  const Point2 ground = ground_point(actor, frame_idx);
  const double h = actor.height_px;

  ScriptedPose out;
  out.action = seg->action;
  for (int k = 0; k < kNumJoints; ++k) {
    out.keypoints.joints[k].u = static_cast<float>(ground.x + body_units[k].x * h);
    out.keypoints.joints[k].v = static_cast<float>(ground.y - body_units[k].y * h);
    out.keypoints.joints[k].rho = 1.0f;
  }
  const Point2 ahead = ground_point(actor, frame_idx + 1);
  const double vx = ahead.x - ground.x;
  out.head_yaw = static_cast<float>(std::atan2(vx, 2.0));
  out.keypoints.head_yaw = out.head_yaw;
  return out;
}

}  // namespace pcv::sim
