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
#include <cstdlib>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/core/image.hpp"
#include "pcv/edge/background.hpp"
#include "pcv/edge/types.hpp"
#include "pcv/sim/render.hpp"

namespace pcv::edge {

struct HeuristicDetectorConfig {
  int bootstrap_frames = 15;   // frames used for the median background
  int diff_threshold = 30;     // max-channel difference marking foreground
  int dilation = 2;            // px, merges limbs into one component
  double min_box_area = 100;   // px²
  double alpha = 0.05;         // selective EMA rate after bootstrap
};

// Background-subtraction detector. Bootstraps a per-pixel median background
// over the first frames, then thresholds |frame - background| and returns the
// connected components. The model is only refreshed outside foreground.
class HeuristicDetector {
 public:
  explicit HeuristicDetector(Size size, HeuristicDetectorConfig cfg = {})
      : cfg_(cfg), model_(size) {}

  bool bootstrapping() const { return !ready_; }
  const HeuristicDetectorConfig& config() const { return cfg_; }

  std::vector<Detection> detect(const Frame& frame) {
    require(frame.size() == model_.size(), ErrorKind::kValidation, "detect: frame size changed mid-stream");
    if (!ready_) {
      warmup_.push_back(frame);
      if (static_cast<int>(warmup_.size()) >= std::max(1, cfg_.bootstrap_frames)) finish_bootstrap();
      return {};
    }
    const Size s = frame.size();
    Bitmap fg(s);
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        const Rgb m = model_.estimate(x, y);
        if (channel_distance(m, frame.at(x, y)) > cfg_.diff_threshold) fg.set(x, y);
      }
    const Bitmap grown = dilate(fg, cfg_.dilation);
    auto dets = components(fg, grown);
    update_background(model_, frame, grown, cfg_.alpha);
    return dets;
  }

 private:
  void finish_bootstrap() {
    const Size s = model_.size();
    std::vector<std::uint8_t> samples(warmup_.size());
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        for (int c = 0; c < 3; ++c) {
          for (std::size_t i = 0; i < warmup_.size(); ++i) samples[i] = warmup_[i].px(x, y)[c];
          auto mid = samples.begin() + samples.size() / 2;
          std::nth_element(samples.begin(), mid, samples.end());
          model_.set_accum(x, y, c, std::uint32_t(*mid) << BackgroundModel::kFracBits);
        }
        model_.seen().set(x, y);
      }
    warmup_.clear();
    warmup_.shrink_to_fit();
    ready_ = true;
  }

  static Bitmap dilate(const Bitmap& in, int r) {
    if (r <= 0) return in;
    Bitmap out(in.size());
    for (int y = 0; y < in.height(); ++y)
      for (int x = 0; x < in.width(); ++x) {
        if (!in.get(x, y)) continue;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            if (out.contains(x + dx, y + dy)) out.set(x + dx, y + dy);
      }
    return out;
  }

  // 8-connected components of `grown`; boxes and scores use the undilated
  // foreground pixels inside each component.
  std::vector<Detection> components(const Bitmap& fg, const Bitmap& grown) const {
    const Size s = fg.size();
    std::vector<int> label(s.area(), -1);
    std::vector<Detection> out;
    std::vector<std::pair<int, int>> stack;
    int next = 0;
    for (int y0 = 0; y0 < s.height; ++y0)
      for (int x0 = 0; x0 < s.width; ++x0) {
        if (!grown.get(x0, y0) || label[std::size_t(y0) * s.width + x0] >= 0) continue;
        int bx0 = s.width, by0 = s.height, bx1 = -1, by1 = -1;
        std::size_t count = 0;
        stack.assign(1, {x0, y0});
        label[std::size_t(y0) * s.width + x0] = next;
        while (!stack.empty()) {
          auto [x, y] = stack.back();
          stack.pop_back();
          if (fg.get(x, y)) {
            ++count;
            bx0 = std::min(bx0, x);
            by0 = std::min(by0, y);
            bx1 = std::max(bx1, x);
            by1 = std::max(by1, y);
          }
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int nx = x + dx, ny = y + dy;
              if (!grown.contains(nx, ny) || !grown.get(nx, ny)) continue;
              int& l = label[std::size_t(ny) * s.width + nx];
              if (l >= 0) continue;
              l = next;
              stack.push_back({nx, ny});
            }
        }
        ++next;
        if (bx1 < 0) continue;
        const BoundingBox box{double(bx0), double(by0), double(bx1 - bx0 + 1), double(by1 - by0 + 1)};
        if (box.area() < cfg_.min_box_area) continue;
        out.push_back({box, std::clamp(count / box.area(), 0.0, 1.0)});
      }
    return out;
  }

  HeuristicDetectorConfig cfg_;
  BackgroundModel model_;
  std::vector<Frame> warmup_;
  bool ready_ = false;
};

// Oracle mode passes ground-truth boxes through with score 1.
inline std::vector<Detection> detect_oracle(const sim::GroundTruthFrame* gt) {
  if (gt == nullptr) fail(ErrorKind::kConfiguration, "oracle detection requires ground truth");
  std::vector<Detection> out;
  out.reserve(gt->actors.size());
  for (const auto& a : gt->actors) out.push_back({a.box, 1.0});
  return out;
}

inline std::vector<Detection> detect(const Frame& frame, PerceptionMode mode, const sim::GroundTruthFrame* gt,
                                     HeuristicDetector* heuristic = nullptr) {
  if (mode == PerceptionMode::kOracle) return detect_oracle(gt);
  if (heuristic == nullptr) fail(ErrorKind::kConfiguration, "heuristic detection requires detector state");
  return heuristic->detect(frame);
}

}  // namespace pcv::edge
