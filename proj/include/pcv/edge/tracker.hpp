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
#include <tuple>
#include <vector>

#include "pcv/edge/types.hpp"

namespace pcv::edge {

struct TrackerConfig {
  double iou_threshold = 0.2;
  int max_misses = 10;
  double velocity_alpha = 0.5;
};

// IoU tracker with constant-velocity prediction. Assignment is greedy on
// descending IoU between predicted track boxes and detections.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {}) : cfg_(cfg) {}

  const TrackerConfig& config() const { return cfg_; }
  const std::vector<Track>& tracks() const { return tracks_; }

  // Advances one frame. Returns all live tracks (matched and coasting),
  // ordered by subject_id.
  std::vector<Track> step(const std::vector<Detection>& detections) {
    for (auto& t : tracks_) {
      t.prior = t.box.translated(t.velocity.x, t.velocity.y);
      t.detection = -1;
    }

    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t ti = 0; ti < tracks_.size(); ++ti)
      for (std::size_t di = 0; di < detections.size(); ++di) {
        const double v = iou(tracks_[ti].prior, detections[di].box);
        if (v >= cfg_.iou_threshold) pairs.emplace_back(v, ti, di);
      }
    std::stable_sort(pairs.begin(), pairs.end(), [](const auto& l, const auto& r) {
      if (std::get<0>(l) != std::get<0>(r)) return std::get<0>(l) > std::get<0>(r);
      if (std::get<1>(l) != std::get<1>(r)) return std::get<1>(l) < std::get<1>(r);
      return std::get<2>(l) < std::get<2>(r);
    });

    std::vector<bool> det_used(detections.size(), false);
    for (const auto& [v, ti, di] : pairs) {
      auto& t = tracks_[ti];
      if (t.detection >= 0 || det_used[di]) continue;
      det_used[di] = true;
      t.detection = static_cast<int>(di);
    }

    const double a = cfg_.velocity_alpha;
    for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
      auto& t = tracks_[ti];
      ++t.age;
      if (t.detection >= 0) {
        const BoundingBox& d = detections[t.detection].box;
        const double gap = double(t.misses + 1);
        const Point2 observed{(d.cx() - last_seen_[ti].cx()) / gap, (d.cy() - last_seen_[ti].cy()) / gap};
        t.velocity = t.velocity * (1 - a) + observed * a;
        t.box = d;
        last_seen_[ti] = d;
        t.misses = 0;
      } else {
        t.box = t.prior;
        ++t.misses;
      }
    }

    // Retire stale tracks.
    for (std::size_t ti = tracks_.size(); ti-- > 0;) {
      if (tracks_[ti].misses > cfg_.max_misses) {
        tracks_.erase(tracks_.begin() + ti);
        last_seen_.erase(last_seen_.begin() + ti);
      }
    }

    for (std::size_t di = 0; di < detections.size(); ++di) {
      if (det_used[di]) continue;
      Track t;
      t.subject_id = next_id_++;
      t.box = detections[di].box;
      t.prior = t.box;
      t.detection = static_cast<int>(di);
      tracks_.push_back(t);
      last_seen_.push_back(t.box);
    }
    return tracks_;
  }

 private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  std::vector<BoundingBox> last_seen_;
  SubjectId next_id_ = 1;
};

}  // namespace pcv::edge
