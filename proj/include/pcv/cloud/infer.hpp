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

#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "pcv/cloud/behavior.hpp"
#include "pcv/core/error.hpp"
#include "pcv/transport/wire.hpp"

namespace pcv::cloud {

inline constexpr double kReportBoxMargin = 0.10;

struct BehaviorEntry {
  SubjectId subject_id = 0;
  BoundingBox box;  // keypoint extent grown by 10%
  BehaviorLabel label = BehaviorLabel::kUnknown;
  double confidence = 0.5;
};

struct BehaviorReport {
  transport::SyncKey key;
  std::vector<BehaviorEntry> entries;  // ordered by subject_id
};

using LabelMap = std::map<SubjectId, BehaviorLabel>;

// Keypoint extent of the visible joints, grown by `margin` of its size.
inline std::optional<BoundingBox> keypoint_box(const KeypointSet& pose, double margin = kReportBoxMargin) {
  auto b = pose.visible_bounds();
  if (!b) return std::nullopt;
  return b->scaled(margin);
}

// Reports on the newest tuple of `window`, using the earlier tuples as motion
// history. `prev` carries each subject's label from the previous frame.
inline BehaviorReport infer(const std::vector<const transport::RepresentationTuple*>& window, const LabelMap& prev,
                            const ClassifierConfig& cfg = {}) {
  require(!window.empty(), ErrorKind::kPrecondition, "infer: empty window");
  for (std::size_t i = 1; i < window.size(); ++i) {
    require(window[i]->key.camera_id == window[0]->key.camera_id, ErrorKind::kPrecondition,
            "infer: window mixes cameras");
    require(window[i]->key.frame_id > window[i - 1]->key.frame_id, ErrorKind::kPrecondition,
            "infer: window is not frame-ordered");
  }
  const auto& now = *window.back();
  BehaviorReport report;
  report.key = now.key;

  std::map<SubjectId, const KeypointSet*> current;
  for (const auto& p : now.poses) current[p.subject_id] = &p.pose;

  for (const auto& [id, pose] : current) {
    std::vector<PoseSample> history;
    for (const auto* t : window)
      for (const auto& p : t->poses)
        if (p.subject_id == id) history.push_back({t->key.frame_id, p.pose});

    BehaviorEntry e;
    e.subject_id = id;
    e.box = keypoint_box(*pose).value_or(BoundingBox{});
    try {
      const auto f = extract_kinematics(history, cfg.window);
      auto it = prev.find(id);
      const auto c = classify_behavior(f, it == prev.end() ? std::nullopt : std::optional(it->second), cfg);
      e.label = c.label;
      e.confidence = c.confidence;
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::kDegenerate) throw;
      e.label = BehaviorLabel::kUnknown;
      e.confidence = 0.5;
    }
    report.entries.push_back(e);
  }
  return report;
}

// Keeps the last `window` tuples of one camera and the previous labels.
class CloudSession {
 public:
  explicit CloudSession(ClassifierConfig cfg = {}) : cfg_(cfg) {
    require(cfg_.window >= 1, ErrorKind::kValidation, "classifier window must be >= 1");
  }

  const ClassifierConfig& config() const { return cfg_; }

  BehaviorReport accept(transport::RepresentationTuple t) {
    window_.push_back(std::move(t));
    while (static_cast<int>(window_.size()) > cfg_.window) window_.pop_front();
    std::vector<const transport::RepresentationTuple*> view;
    for (const auto& w : window_) view.push_back(&w);
    auto report = infer(view, prev_, cfg_);
    prev_.clear();
    for (const auto& e : report.entries) prev_[e.subject_id] = e.label;
    return report;
  }

 private:
  ClassifierConfig cfg_;
  std::deque<transport::RepresentationTuple> window_;
  LabelMap prev_;
};

}  // namespace pcv::cloud
