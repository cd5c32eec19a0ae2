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

#include <cmath>
#include <cstdint>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/core/image.hpp"
#include "pcv/edge/types.hpp"

namespace pcv::edge {

// Running background estimate in 16.16 fixed point, plus a bitmap of pixels
// that have ever been observed unmasked.
class BackgroundModel {
 public:
  static constexpr int kFracBits = 16;
  static constexpr std::uint32_t kOne = 1u << kFracBits;

  BackgroundModel() = default;
  explicit BackgroundModel(Size size) : size_(size), accum_(size.area() * 3, 0), seen_(size) {}

  Size size() const { return size_; }
  const Bitmap& seen() const { return seen_; }
  Bitmap& seen() { return seen_; }

  std::uint32_t accum(int x, int y, int c) const { return accum_[index(x, y) + c]; }
  void set_accum(int x, int y, int c, std::uint32_t v) { accum_[index(x, y) + c] = v; }

  // Rounded 8-bit estimate at a seen pixel.
  Rgb estimate(int x, int y) const {
    const std::size_t i = index(x, y);
    auto ch = [&](int c) {
      return static_cast<std::uint8_t>(std::min<std::uint32_t>(255, (accum_[i + c] + kOne / 2) >> kFracBits));
    };
    return {ch(0), ch(1), ch(2)};
  }

  friend bool operator==(const BackgroundModel&, const BackgroundModel&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * size_.width + x) * 3;
  }

  Size size_;
  std::vector<std::uint32_t> accum_;
  Bitmap seen_;
};

inline constexpr double kDefaultBackgroundAlpha = 0.05;

// EMA update at unmasked pixels only; the first observation of a pixel sets
// the estimate directly. Masked pixels are never read.
inline void update_background(BackgroundModel& model, const Frame& frame, const Bitmap& joint_mask,
                              double alpha = kDefaultBackgroundAlpha) {
  require(frame.size() == model.size() && joint_mask.size() == model.size(), ErrorKind::kValidation,
          "update_background: dimension mismatch");
  require(alpha > 0 && alpha <= 1, ErrorKind::kValidation, "update_background: alpha outside (0,1]");
  const std::int64_t a = std::llround(alpha * BackgroundModel::kOne);
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      if (joint_mask.get(x, y)) continue;
      const std::uint8_t* p = frame.px(x, y);
      if (!model.seen().get(x, y)) {
        for (int c = 0; c < 3; ++c) model.set_accum(x, y, c, std::uint32_t(p[c]) << BackgroundModel::kFracBits);
        model.seen().set(x, y);
        continue;
      }
      for (int c = 0; c < 3; ++c) {
        const std::int64_t cur = model.accum(x, y, c);
        const std::int64_t target = std::int64_t(p[c]) << BackgroundModel::kFracBits;
        const std::int64_t delta = (target - cur) * a;
        const std::int64_t half = BackgroundModel::kOne / 2;
        const std::int64_t step = delta >= 0 ? (delta + half) >> BackgroundModel::kFracBits
                                             : -((-delta + half) >> BackgroundModel::kFracBits);
        model.set_accum(x, y, c, static_cast<std::uint32_t>(cur + step));
      }
    }
  }
}

// Pixel erasure. Unmasked pixels pass through; masked pixels come from the
// background model, or mid-gray where the model has never seen the pixel.
// The output never depends on masked input pixels.
inline DesensitizedFrame erase(const Frame& frame, const Bitmap& joint_mask, const BackgroundModel& model) {
  require(frame.size() == joint_mask.size() && frame.size() == model.size(), ErrorKind::kValidation,
          "erase: dimension mismatch");
  DesensitizedFrame out{RgbImage(frame.size())};
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      if (!joint_mask.get(x, y)) {
        out.image.set(x, y, frame.at(x, y));
      } else if (model.seen().get(x, y)) {
        out.image.set(x, y, model.estimate(x, y));
      } else {
        out.image.set(x, y, kNeverSeenFill);
      }
    }
  }
  return out;
}

}  // namespace pcv::edge
