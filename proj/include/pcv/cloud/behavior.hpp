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
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/core/skeleton.hpp"

namespace pcv::cloud {

enum class BehaviorLabel { kStanding, kWalking, kSitting, kFallen, kFalling, kRaisingArm, kUnknown };

inline constexpr BehaviorLabel kAllLabels[] = {BehaviorLabel::kStanding, BehaviorLabel::kWalking,
                                               BehaviorLabel::kSitting,  BehaviorLabel::kFallen,
                                               BehaviorLabel::kFalling,  BehaviorLabel::kRaisingArm,
                                               BehaviorLabel::kUnknown};

inline std::string_view to_string(BehaviorLabel l) {
  switch (l) {
    case BehaviorLabel::kStanding:
      return "standing";
    case BehaviorLabel::kWalking:
      return "walking";
    case BehaviorLabel::kSitting:
      return "sitting";
    case BehaviorLabel::kFallen:
      return "fallen";
    case BehaviorLabel::kFalling:
      return "falling";
    case BehaviorLabel::kRaisingArm:
      return "raising_arm";
    case BehaviorLabel::kUnknown:
      return "unknown";
  }
  return "unknown";
}

inline BehaviorLabel parse_label(std::string_view s) {
  for (BehaviorLabel l : kAllLabels)
    if (to_string(l) == s) return l;
  fail(ErrorKind::kValidation, "unknown behavior label '" + std::string(s) + "'");
}

// Thresholds of the rule classifier. Lengths are fractions of torso length.
struct ClassifierConfig {
  int window = 5;                          // frames used for velocity fits
  double falling_vy = 0.08;                // hip drop speed, torso/frame
  double fallen_spine_deg = 60;
  double fallen_spine_hold_deg = 50;       // used while the previous label is fallen
  double fallen_aspect = 0.8;              // keypoint box height / width
  double sitting_hip_knee = 0.15;          // |hip v - knee v|, torso
  double sitting_spine_deg = 30;
  double raising_arm_wrist = 0.10;         // wrist above nose, torso
  double walking_vx = 0.02;                // |hip horizontal speed|, torso/frame
  double standing_spine_deg = 20;
  double confidence_gain = 4;
};

struct KinematicFeatures {
  double spine_angle = 0;  // degrees from image vertical
  Point2 hip_mid;
  double hip_vy = 0;  // px/frame, positive is downward
  double hip_vx = 0;
  double kp_bbox_aspect = 0;
  double torso_len = 0;
  std::optional<double> knee_mid_v;
  std::optional<double> wrist_above_nose;  // px, largest over visible wrists
};

// Least-squares slope of y against x. Zero for fewer than two points.
inline double lsq_slope(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 2) return 0;
  double mx = 0, my = 0;
  for (auto [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxx > 0 ? sxy / sxx : 0;
}

struct PoseSample {
  std::uint64_t frame_id = 0;
  KeypointSet pose;
};

// Features of the newest sample in `history` (oldest first). Velocities are
// fitted over the last min(window, available) samples.
inline KinematicFeatures extract_kinematics(const std::vector<PoseSample>& history, int window = 5) {
  require(!history.empty(), ErrorKind::kPrecondition, "extract_kinematics: empty history");
  const KeypointSet& now = history.back().pose;
  if (now.visible_count() == 0) fail(ErrorKind::kDegenerate, "all joints invisible");
  const auto hip = now.hip_mid();
  const auto sh = now.shoulder_mid();
  if (!hip || !sh) fail(ErrorKind::kDegenerate, "hip or shoulder joints invisible");

  KinematicFeatures f;
  f.hip_mid = *hip;
  f.torso_len = (*sh - *hip).norm();
  if (!(f.torso_len > 0)) fail(ErrorKind::kDegenerate, "zero torso length");
  f.spine_angle = *spine_angle_deg(now);

  const auto box = *now.visible_bounds();
  f.kp_bbox_aspect = box.h / std::max(box.w, 1.0);

  std::vector<std::pair<double, double>> vx, vy;
  const std::size_t first = history.size() > std::size_t(window) ? history.size() - window : 0;
  for (std::size_t i = first; i < history.size(); ++i) {
    if (auto h = history[i].pose.hip_mid()) {
      vx.emplace_back(double(history[i].frame_id), h->x);
      vy.emplace_back(double(history[i].frame_id), h->y);
    }
  }
  f.hip_vx = lsq_slope(vx);
  f.hip_vy = lsq_slope(vy);

  if (auto knee = now.knee_mid()) f.knee_mid_v = knee->y;
  const auto& nose = now[Joint::kNose];
  if (nose.visible()) {
    for (Joint w : {Joint::kLeftWrist, Joint::kRightWrist}) {
      if (!now[w].visible()) continue;
      const double above = nose.v - now[w].v;
      f.wrist_above_nose = std::max(f.wrist_above_nose.value_or(above), above);
    }
  }
  return f;
}

struct Classification {
  BehaviorLabel label = BehaviorLabel::kUnknown;
  double confidence = 0.5;
};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// First matching rule wins. Each condition contributes a slack normalised by
// its threshold; confidence is the logistic of gain times the mean slack of
// the firing rule. Comparisons are inclusive, so a value sitting exactly on a
// threshold fires with confidence 0.5.
inline Classification classify_behavior(const KinematicFeatures& f, std::optional<BehaviorLabel> prev,
                                        const ClassifierConfig& cfg = {}) {
  const double t = f.torso_len;
  auto fire = [&](std::initializer_list<double> slacks) {
    double s = 0;
    for (double v : slacks) s += v;
    return std::clamp(logistic(cfg.confidence_gain * s / slacks.size()), 0.0, 1.0);
  };

  const double fall_v = cfg.falling_vy * t;
  if (f.hip_vy >= fall_v) return {BehaviorLabel::kFalling, fire({(f.hip_vy - fall_v) / fall_v})};

  const double spine_min = prev == BehaviorLabel::kFallen ? cfg.fallen_spine_hold_deg : cfg.fallen_spine_deg;
  if (f.spine_angle >= spine_min && f.kp_bbox_aspect <= cfg.fallen_aspect)
    return {BehaviorLabel::kFallen,
            fire({(f.spine_angle - spine_min) / spine_min, (cfg.fallen_aspect - f.kp_bbox_aspect) / cfg.fallen_aspect})};

  if (f.knee_mid_v) {
    const double gap = std::abs(f.hip_mid.y - *f.knee_mid_v);
    const double gap_max = cfg.sitting_hip_knee * t;
    if (gap <= gap_max && f.spine_angle <= cfg.sitting_spine_deg)
      return {BehaviorLabel::kSitting, fire({(gap_max - gap) / gap_max,
                                             (cfg.sitting_spine_deg - f.spine_angle) / cfg.sitting_spine_deg})};
  }

  if (f.wrist_above_nose) {
    const double need = cfg.raising_arm_wrist * t;
    if (*f.wrist_above_nose >= need) return {BehaviorLabel::kRaisingArm, fire({(*f.wrist_above_nose - need) / need})};
  }

  const double walk_v = cfg.walking_vx * t;
  if (std::abs(f.hip_vx) >= walk_v)
    return {BehaviorLabel::kWalking, fire({(std::abs(f.hip_vx) - walk_v) / walk_v})};

  if (f.spine_angle <= cfg.standing_spine_deg)
    return {BehaviorLabel::kStanding,
            fire({(cfg.standing_spine_deg - f.spine_angle) / cfg.standing_spine_deg})};

  return {};
}

}  // namespace pcv::cloud
