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

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

#include "pcv/core/image.hpp"

namespace pcv {

inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
  double x = 0;
  double y = 0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(const Point2&, const Point2&) = default;
  double norm() const { return std::hypot(x, y); }
};

inline Point2 midpoint(Point2 a, Point2 b) { return {(a.x + b.x) / 2, (a.y + b.y) / 2}; }
inline Point2 lerp(Point2 a, Point2 b, double t) { return a + (b - a) * t; }

// COCO keypoint order.
enum class Joint : int {
  kNose = 0,
  kLeftEye,
  kRightEye,
  kLeftEar,
  kRightEar,
  kLeftShoulder,
  kRightShoulder,
  kLeftElbow,
  kRightElbow,
  kLeftWrist,
  kRightWrist,
  kLeftHip,
  kRightHip,
  kLeftKnee,
  kRightKnee,
  kLeftAnkle,
  kRightAnkle,
};

inline constexpr int kNumJoints = 17;

inline constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "nose",          "left_eye",       "right_eye",  "left_ear",
    "right_ear",     "left_shoulder",  "right_shoulder", "left_elbow",
    "right_elbow",   "left_wrist",     "right_wrist", "left_hip",
    "right_hip",     "left_knee",      "right_knee", "left_ankle",
    "right_ankle"};

constexpr int idx(Joint j) { return static_cast<int>(j); }

// The 16 bones drawn by the proxy renderer. Ears hang off the shoulders so the
// head disc stays attached to the torso.
inline constexpr std::array<std::pair<Joint, Joint>, 16> kBones = {{
    {Joint::kLeftAnkle, Joint::kLeftKnee},
    {Joint::kLeftKnee, Joint::kLeftHip},
    {Joint::kRightAnkle, Joint::kRightKnee},
    {Joint::kRightKnee, Joint::kRightHip},
    {Joint::kLeftHip, Joint::kRightHip},
    {Joint::kLeftShoulder, Joint::kLeftHip},
    {Joint::kRightShoulder, Joint::kRightHip},
    {Joint::kLeftShoulder, Joint::kRightShoulder},
    {Joint::kLeftShoulder, Joint::kLeftElbow},
    {Joint::kLeftElbow, Joint::kLeftWrist},
    {Joint::kRightShoulder, Joint::kRightElbow},
    {Joint::kRightElbow, Joint::kRightWrist},
    {Joint::kNose, Joint::kLeftEye},
    {Joint::kNose, Joint::kRightEye},
    {Joint::kLeftEar, Joint::kLeftShoulder},
    {Joint::kRightEar, Joint::kRightShoulder},
}};

// Single keypoint. f32 so values survive the wire bit-exactly.
struct Keypoint {
  float u = 0;
  float v = 0;
  float rho = 0;

  bool visible() const { return rho > 0; }
  Point2 pt() const { return {u, v}; }
  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct KeypointSet {
  std::array<Keypoint, kNumJoints> joints{};
  std::optional<float> head_yaw;

  const Keypoint& operator[](Joint j) const { return joints[idx(j)]; }
  Keypoint& operator[](Joint j) { return joints[idx(j)]; }

  int visible_count() const {
    int n = 0;
    for (const auto& k : joints) n += k.visible() ? 1 : 0;
    return n;
  }

  // Midpoint of the visible members of a left/right pair.
  std::optional<Point2> pair_mid(Joint a, Joint b) const {
    const auto& ka = (*this)[a];
    const auto& kb = (*this)[b];
    if (ka.visible() && kb.visible()) return midpoint(ka.pt(), kb.pt());
    if (ka.visible()) return ka.pt();
    if (kb.visible()) return kb.pt();
    return std::nullopt;
  }

  std::optional<Point2> hip_mid() const {
    return pair_mid(Joint::kLeftHip, Joint::kRightHip);
  }
  std::optional<Point2> shoulder_mid() const {
    return pair_mid(Joint::kLeftShoulder, Joint::kRightShoulder);
  }
  std::optional<Point2> knee_mid() const {
    return pair_mid(Joint::kLeftKnee, Joint::kRightKnee);
  }
  std::optional<Point2> ankle_mid() const {
    return pair_mid(Joint::kLeftAnkle, Joint::kRightAnkle);
  }

  // Bounding box of visible joints; nullopt if none are visible.
  std::optional<BoundingBox> visible_bounds() const {
    double x0 = 1e30, y0 = 1e30, x1 = -1e30, y1 = -1e30;
    bool any = false;
    for (const auto& k : joints) {
      if (!k.visible()) continue;
      any = true;
      x0 = std::min(x0, double(k.u));
      y0 = std::min(y0, double(k.v));
      x1 = std::max(x1, double(k.u));
      y1 = std::max(y1, double(k.v));
    }
    if (!any) return std::nullopt;
    return BoundingBox{x0, y0, x1 - x0, y1 - y0};
  }

  friend bool operator==(const KeypointSet&, const KeypointSet&) = default;
};

// Hip-midpoint → shoulder-midpoint angle from image vertical, in degrees.
inline std::optional<double> spine_angle_deg(const KeypointSet& pose) {
  auto hip = pose.hip_mid();
  auto sh = pose.shoulder_mid();
  if (!hip || !sh) return std::nullopt;
  const Point2 d = *sh - *hip;
  const double len = d.norm();
  if (len <= 0) return std::nullopt;
  // Image y grows downward, so "up" is (0, -1).
  const double c = std::clamp(-d.y / len, -1.0, 1.0);
  return std::acos(c) * 180.0 / kPi;
}

}  // namespace pcv
