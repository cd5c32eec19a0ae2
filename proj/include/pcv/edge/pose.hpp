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
#include <random>

#include "pcv/core/error.hpp"
#include "pcv/edge/types.hpp"
#include "pcv/sim/render.hpp"

namespace pcv::edge {

inline constexpr double kPoseAssociationIou = 0.5;

// Index of the ground-truth actor matching `box`, or -1.
inline int associate(const BoundingBox& box, const sim::GroundTruthFrame& gt) {
  int best = -1;
  double best_iou = kPoseAssociationIou;
  for (std::size_t i = 0; i < gt.actors.size(); ++i) {
    const double v = iou(box, gt.actors[i].box);
    if (v >= best_iou) {
      best_iou = v;
      best = static_cast<int>(i);
    }
  }
  return best;
}

// Ground-truth pose estimator with optional isotropic Gaussian noise.
// Joints that land outside `box` are clamped onto it and marked invisible.
inline KeypointSet estimate_pose(const Frame& frame, const BoundingBox& box, PerceptionMode mode,
                                 const sim::GroundTruthFrame* gt, double noise_sigma, std::mt19937_64& rng) {
  if (mode == PerceptionMode::kHeuristic)
    fail(ErrorKind::kCapability, "pose estimation has no heuristic implementation");
  if (gt == nullptr) fail(ErrorKind::kConfiguration, "oracle pose estimation requires ground truth");
  require(box.within(frame.size()), ErrorKind::kValidation, "estimate_pose: box outside frame");
  require(noise_sigma >= 0, ErrorKind::kValidation, "estimate_pose: negative noise_sigma");

  const int match = associate(box, *gt);
  if (match < 0) fail(ErrorKind::kAssociation, "no ground-truth actor overlaps the box with IoU >= 0.5");

  KeypointSet out = gt->actors[match].keypoints;
  out.head_yaw = gt->actors[match].head_yaw;
  std::normal_distribution<double> noise(0.0, noise_sigma > 0 ? noise_sigma : 1.0);
  for (auto& k : out.joints) {
    double u = k.u, v = k.v;
    if (noise_sigma > 0) {
      u += noise(rng);
      v += noise(rng);
    }
    k.rho = 1.0f;
    if (!box.contains(u, v)) {
      u = std::clamp(u, box.x, box.right());
      v = std::clamp(v, box.y, box.bottom());
      k.rho = 0.0f;
    }
    k.u = static_cast<float>(u);
    k.v = static_cast<float>(v);
  }
  return out;
}

}  // namespace pcv::edge
