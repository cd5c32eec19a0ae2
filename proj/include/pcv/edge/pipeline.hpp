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

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/edge/background.hpp"
#include "pcv/edge/compose.hpp"
#include "pcv/edge/detect.hpp"
#include "pcv/edge/pose.hpp"
#include "pcv/edge/proxy.hpp"
#include "pcv/edge/tracker.hpp"

namespace pcv::edge {

struct EdgeConfig {
  PerceptionMode mode = PerceptionMode::kOracle;
  TrackerConfig tracker;
  HeuristicDetectorConfig detector;
  double background_alpha = kDefaultBackgroundAlpha;
  double noise_sigma = 0;            // keypoint noise, px
  double embedding_noise_sigma = 0;  // additive noise on embedding entries
  std::uint64_t seed = 0;
  ProxyStyle proxy;
};

// Per-stream state. One instance per camera; frames must be fed in order.
struct EdgeState {
  EdgeState(Size size, EdgeConfig config)
      : cfg_(config), size_(size), tracker_(config.tracker), background_(size), rng_(config.seed) {
    if (cfg_.mode == PerceptionMode::kHeuristic) detector_.emplace(size, cfg_.detector);
  }

  const EdgeConfig& config() const { return cfg_; }
  Size size() const { return size_; }
  const BackgroundModel& background() const { return background_; }
  int frames_processed() const { return frames_; }

  EdgeConfig cfg_;
  Size size_;
  Tracker tracker_;
  BackgroundModel background_;
  std::optional<HeuristicDetector> detector_;
  std::mt19937_64 rng_;
  int frames_ = 0;
};

// Everything the edge emits for one frame.
struct EdgeOutput {
  int frame_idx = 0;
  DesensitizedFrame desensitized;
  std::vector<SubjectPose> poses;  // ordered by subject_id
  OcclusionOrder order;
  AnonymizedComposite composite;
  VisionEmbedding embedding;
  std::vector<Track> tracks;
  std::vector<SkeletalProxy> proxies;
  int unassociated = 0;  // heuristic mode: detections without a pose
  bool bootstrapping = false;
};

namespace pipeline_detail {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.with_stage(name);
  }
}

}  // namespace pipeline_detail

inline EdgeOutput process_frame(const Frame& frame, EdgeState& state, const sim::GroundTruthFrame* gt) {
  using pipeline_detail::stage;
  const EdgeConfig& cfg = state.cfg_;
  require(frame.size() == state.size_, ErrorKind::kValidation, "process_frame: frame size differs from stream");

  EdgeOutput out;
  out.frame_idx = state.frames_++;

  out.bootstrapping = state.detector_ && state.detector_->bootstrapping();
  const auto detections = stage("detect", [&] {
    return detect(frame, cfg.mode, gt, state.detector_ ? &*state.detector_ : nullptr);
  });

  out.tracks = stage("track", [&] { return state.tracker_.step(detections); });

  std::map<SubjectId, KeypointSet> poses;
  std::map<SubjectId, BoundingBox> boxes;
  stage("estimate_pose", [&] {
    for (const auto& t : out.tracks) {
      if (!t.matched()) continue;
      if (cfg.mode == PerceptionMode::kHeuristic) {
        if (gt == nullptr) fail(ErrorKind::kConfiguration, "pose estimation requires ground truth");
        if (associate(t.box.clipped(state.size_), *gt) < 0) {
          ++out.unassociated;
          continue;
        }
      }
      poses[t.subject_id] =
          estimate_pose(frame, t.box.clipped(state.size_), PerceptionMode::kOracle, gt, cfg.noise_sigma, state.rng_);
      boxes[t.subject_id] = t.box;
    }
    return 0;
  });

  const Bitmap joint_mask = stage("segment", [&] {
    Bitmap m(state.size_, out.bootstrapping);
    if (cfg.mode == PerceptionMode::kOracle) {
      if (gt == nullptr) fail(ErrorKind::kConfiguration, "oracle segmentation requires ground truth");
      for (const auto& a : gt->actors) m |= a.mask;
    } else {
      for (const auto& d : detections) {
        const PixelRange r = pixel_range(d.box, state.size_);
        for (int y = r.y0; y < std::min(r.y1, int(std::ceil(d.box.bottom()))); ++y)
          for (int x = r.x0; x < std::min(r.x1, int(std::ceil(d.box.right()))); ++x) m.set(x, y);
      }
    }
    return m;
  });

  out.desensitized = stage("erase", [&] { return erase(frame, joint_mask, state.background_); });
  stage("update_background", [&] {
    update_background(state.background_, frame, joint_mask, cfg.background_alpha);
    return 0;
  });

  stage("render_proxy", [&] {
    for (const auto& [id, pose] : poses) {
      out.poses.push_back({id, pose});
      out.proxies.push_back(render_proxy(pose, boxes[id], state.size_, id, cfg.proxy));
    }
    return 0;
  });

  out.order = stage("occlusion_order", [&] { return occlusion_order(out.tracks, poses); });
  out.composite = stage("overlay", [&] { return overlay(out.desensitized, out.proxies, out.order); });
  out.embedding = stage("embed", [&] {
    auto z = embed(out.composite);
    if (cfg.embedding_noise_sigma > 0) {
      std::normal_distribution<double> noise(0.0, cfg.embedding_noise_sigma);
      for (auto& v : z.values) v = static_cast<float>(std::clamp(v + noise(state.rng_), 0.0, 1.0));
    }
    return z;
  });
  return out;
}

}  // namespace pcv::edge
