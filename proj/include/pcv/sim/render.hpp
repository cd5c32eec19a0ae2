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
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/core/image.hpp"
#include "pcv/core/raster.hpp"
#include "pcv/sim/scene.hpp"

namespace pcv::sim {

struct GroundTruthActor {
  std::string actor_id;
  BoundingBox box;
  Bitmap mask;
  KeypointSet keypoints;
  float head_yaw = 0;
  Action action = Action::kStand;
};

struct GroundTruthFrame {
  int frame_idx = 0;
  std::vector<GroundTruthActor> actors;
  std::shared_ptr<const RgbImage> clean_background;

  Bitmap joint_mask(Size size) const {
    Bitmap m(size);
    for (const auto& a : actors) m |= a.mask;
    return m;
  }
};

struct ActorShapes {
  std::vector<Capsule> clothing;
  std::vector<Capsule> skin_capsules;
  Disc head;

  BoundingBox bounds() const {
    double x0 = head.bounds().x, y0 = head.bounds().y;
    double x1 = head.bounds().right(), y1 = head.bounds().bottom();
    auto grow = [&](const BoundingBox& b) {
      x0 = std::min(x0, b.x);
      y0 = std::min(y0, b.y);
      x1 = std::max(x1, b.right());
      y1 = std::max(y1, b.bottom());
    };
    for (const auto& c : clothing) grow(c.bounds());
    for (const auto& c : skin_capsules) grow(c.bounds());
    return {x0, y0, x1 - x0, y1 - y0};
  }
};

inline ActorShapes actor_shapes(const KeypointSet& kp, double height_px) {
  auto p = [&](Joint j) { return kp[j].pt(); };
  const double h = height_px;
  const Point2 sh = midpoint(p(Joint::kLeftShoulder), p(Joint::kRightShoulder));
  const Point2 hip = midpoint(p(Joint::kLeftHip), p(Joint::kRightHip));

  ActorShapes s;
  s.clothing.push_back({sh, hip, body::kTorsoRadius * h});
  s.clothing.push_back({p(Joint::kLeftShoulder), p(Joint::kRightShoulder), body::kArmRadius * h});
  s.clothing.push_back({p(Joint::kLeftHip), p(Joint::kRightHip), 0.04 * h});
  for (auto [a, b] : {std::pair{Joint::kLeftShoulder, Joint::kLeftElbow},
                      std::pair{Joint::kLeftElbow, Joint::kLeftWrist},
                      std::pair{Joint::kRightShoulder, Joint::kRightElbow},
                      std::pair{Joint::kRightElbow, Joint::kRightWrist}})
    s.clothing.push_back({p(a), p(b), body::kArmRadius * h});
  for (auto [a, b] : {std::pair{Joint::kLeftHip, Joint::kLeftKnee},
                      std::pair{Joint::kLeftKnee, Joint::kLeftAnkle},
                      std::pair{Joint::kRightHip, Joint::kRightKnee},
                      std::pair{Joint::kRightKnee, Joint::kRightAnkle}})
    s.clothing.push_back({p(a), p(b), body::kLegRadius * h});

  Point2 head{0, 0};
  for (Joint j : {Joint::kNose, Joint::kLeftEye, Joint::kRightEye, Joint::kLeftEar, Joint::kRightEar})
    head = head + p(j);
  head = head * (1.0 / 5);
  s.skin_capsules.push_back({sh, p(Joint::kNose), body::kArmRadius * h});
  s.head = {head, body::kHeadRadius * h};
  return s;
}

inline RgbImage render_background(const SceneSpec& spec) {
  const auto& bg = spec.background;
  RgbImage img(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      Rgb c = bg.color_a;
      switch (bg.kind) {
        case BackgroundKind::kFlat:
          break;
        case BackgroundKind::kChecker:
          if (((x / bg.cell) + (y / bg.cell)) % 2 == 1) c = bg.color_b;
          break;
        case BackgroundKind::kGradient: {
          const double t = bg.vertical ? y / double(std::max(1, spec.height - 1))
                                       : x / double(std::max(1, spec.width - 1));
          auto mix = [t](std::uint8_t a, std::uint8_t b) {
            return static_cast<std::uint8_t>(std::lround(a + (b - a) * t));
          };
          c = {mix(bg.color_a.r, bg.color_b.r), mix(bg.color_a.g, bg.color_b.g),
               mix(bg.color_a.b, bg.color_b.b)};
          break;
        }
      }
      img.set(x, y, c);
    }
  }
  return img;
}

namespace detail {

[[noreturn]] inline void invalid(const std::string& field, const std::string& why) {
  fail(ErrorKind::kValidation, field + ": " + why);
}

}  // namespace detail

// Throws a validation error naming the first violated field.
inline void validate(const SceneSpec& spec) {
  using detail::invalid;
  if (spec.width < kMinDimension) invalid("width", "must be >= 64");
  if (spec.height < kMinDimension) invalid("height", "must be >= 64");
  if (spec.frame_count < 1) invalid("frame_count", "must be >= 1");
  if (static_cast<int>(spec.actors.size()) > kMaxActors) invalid("actors", "at most 16 actors");
  if (spec.background.kind == BackgroundKind::kChecker && spec.background.cell < 1)
    invalid("background.cell", "must be >= 1");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < spec.actors.size(); ++i) {
    const auto& a = spec.actors[i];
    const std::string f = "actors[" + std::to_string(i) + "]";
    if (a.actor_id.empty()) invalid(f + ".actor_id", "must be non-empty");
    if (!ids.insert(a.actor_id).second) invalid(f + ".actor_id", "duplicate id '" + a.actor_id + "'");
    for (std::size_t k = 0; k < i; ++k)
      if (spec.actors[k].appearance.clothing == a.appearance.clothing)
        invalid(f + ".appearance", "clothing color repeats actors[" + std::to_string(k) + "]");
    if (!(a.height_px >= 16)) invalid(f + ".height_px", "must be >= 16");
    if (a.trajectory.empty()) invalid(f + ".trajectory", "needs at least one waypoint");
    for (std::size_t k = 1; k < a.trajectory.size(); ++k)
      if (a.trajectory[k].frame <= a.trajectory[k - 1].frame)
        invalid(f + ".trajectory", "waypoint frames must strictly increase");

    auto segs = a.script;
    std::sort(segs.begin(), segs.end(), [](auto& l, auto& r) { return l.begin < r.begin; });
    int next = 0;
    for (const auto& s : segs) {
      if (s.end <= s.begin) invalid(f + ".script", "empty or reversed frame range");
      if (s.begin != next)
        invalid(f + ".script", "frame ranges must be disjoint and contiguous (expected begin " +
                                   std::to_string(next) + ", got " + std::to_string(s.begin) + ")");
      if (s.transition_frames && *s.transition_frames < 1)
        invalid(f + ".script", "transition_frames must be >= 1");
      next = s.end;
    }
    if (next != spec.frame_count)
      invalid(f + ".script", "frame ranges must cover [0, frame_count)");

    for (int t = 0; t < spec.frame_count; ++t) {
      const auto pose = pose_at(a, t);
      const BoundingBox b = actor_shapes(pose.keypoints, a.height_px).bounds();
      if (!b.within(spec.size()))
        invalid(f + ".trajectory", "actor leaves the frame at frame " + std::to_string(t));
    }
  }
}

// Stateless renderer; validates once, then renders any frame on demand.
class SceneRenderer {
 public:
  explicit SceneRenderer(SceneSpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    background_ = std::make_shared<const RgbImage>(render_background(spec_));
  }

  const SceneSpec& spec() const { return spec_; }
  int frame_count() const { return spec_.frame_count; }
  const std::shared_ptr<const RgbImage>& background() const { return background_; }

  std::pair<Frame, GroundTruthFrame> render(int frame_idx) const {
    if (frame_idx < 0 || frame_idx >= spec_.frame_count)
      fail(ErrorKind::kRange, "frame index " + std::to_string(frame_idx) + " out of range");

    Frame frame = *background_;
    GroundTruthFrame gt;
    gt.frame_idx = frame_idx;
    gt.clean_background = background_;

    struct Posed {
      std::size_t index;
      ScriptedPose pose;
      double depth;
    };
    std::vector<Posed> posed;
    for (std::size_t i = 0; i < spec_.actors.size(); ++i) {
      auto pose = pose_at(spec_.actors[i], frame_idx);
      const double depth = pose.keypoints.ankle_mid()->y;
      posed.push_back({i, std::move(pose), depth});
    }
    // Far (small image y) first so nearer actors overwrite them.
    std::vector<std::size_t> order(posed.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return posed[l].depth < posed[r].depth; });

    gt.actors.resize(posed.size());
    for (std::size_t o : order) {
      const auto& actor = spec_.actors[posed[o].index];
      const auto shapes = actor_shapes(posed[o].pose.keypoints, actor.height_px);
      Bitmap mask(spec_.size());
      auto put = [&](int x, int y, Rgb c) {
        // Actor pixels never coincide with the clean background.
        if (c == background_->at(x, y)) c.b ^= 1;
        frame.set(x, y, c);
        mask.set(x, y);
      };
      for (const auto& c : shapes.clothing)
        for_each_covered(c, spec_.size(), [&](int x, int y) { put(x, y, actor.appearance.clothing); });
      for (const auto& c : shapes.skin_capsules)
        for_each_covered(c, spec_.size(), [&](int x, int y) { put(x, y, actor.appearance.skin); });
      for_each_covered(shapes.head, spec_.size(), [&](int x, int y) { put(x, y, actor.appearance.skin); });

      auto& g = gt.actors[posed[o].index];
      g.actor_id = actor.actor_id;
      g.box = bitmap_bounds(mask);
      g.mask = std::move(mask);
      g.keypoints = posed[o].pose.keypoints;
      g.head_yaw = posed[o].pose.head_yaw;
      g.action = posed[o].pose.action;
    }
    return {std::move(frame), std::move(gt)};
  }

 private:
  SceneSpec spec_;
  std::shared_ptr<const RgbImage> background_;
};

struct GeneratedScene {
  std::vector<Frame> frames;
  std::vector<GroundTruthFrame> ground_truth;
};

inline GeneratedScene generate_scene(const SceneSpec& spec) {
  SceneRenderer renderer(spec);
  GeneratedScene out;
  out.frames.reserve(spec.frame_count);
  out.ground_truth.reserve(spec.frame_count);
  for (int t = 0; t < spec.frame_count; ++t) {
    auto [frame, gt] = renderer.render(t);
    out.frames.push_back(std::move(frame));
    out.ground_truth.push_back(std::move(gt));
  }
  return out;
}

}  // namespace pcv::sim
