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
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/core/raster.hpp"
#include "pcv/edge/types.hpp"

namespace pcv::edge {

struct ProxyStyle {
  double bone_width_fraction = 0.06;   // of torso length
  double min_bone_radius = 1.0;        // px
  double head_radius_fraction = 0.5;   // of inter-ear distance
  double head_fallback_fraction = 0.15;  // of torso length
  double torso_fallback_fraction = 0.3;  // of box height
  int tick_overhang = 2;               // px beyond the head rim
  bool subject_tags = false;           // debug only
};

inline double proxy_torso_length(const KeypointSet& pose, const BoundingBox& box, const ProxyStyle& style = {}) {
  const auto& ls = pose[Joint::kLeftShoulder];
  const auto& rs = pose[Joint::kRightShoulder];
  const auto& lh = pose[Joint::kLeftHip];
  const auto& rh = pose[Joint::kRightHip];
  if (ls.visible() && rs.visible() && lh.visible() && rh.visible()) {
    const double t = (midpoint(ls.pt(), rs.pt()) - midpoint(lh.pt(), rh.pt())).norm();
    if (t > 0) return t;
  }
  return style.torso_fallback_fraction * box.h;
}

namespace proxy_detail {

// 3x5 digit glyphs, row-major bits, used for the debug subject tag.
inline constexpr std::array<std::uint16_t, 10> kDigits = {
    0b111101101101111, 0b010110010010111, 0b111001111100111, 0b111001111001111, 0b101101111001001,
    0b111100111001111, 0b111100111101111, 0b111001001001001, 0b111101111101111, 0b111101111001111};

}  // namespace proxy_detail

// Skeletal proxy renderer. The output depends on (pose, head yaw, box) only:
// every subject gets the same fill and outline, so no appearance survives.
inline SkeletalProxy render_proxy(const KeypointSet& pose, const BoundingBox& box, Size canvas,
                                  SubjectId subject_id = 0, const ProxyStyle& style = {}) {
  if (pose.visible_count() < 2) fail(ErrorKind::kDegenerate, "proxy needs at least two visible joints");

  const double torso = proxy_torso_length(pose, box, style);
  const double bone_r = std::max(style.min_bone_radius, style.bone_width_fraction * torso / 2);

  std::vector<Capsule> bones;
  for (auto [a, b] : kBones) {
    if (pose[a].visible() && pose[b].visible()) bones.push_back({pose[a].pt(), pose[b].pt(), bone_r});
  }
  std::optional<Disc> head;
  std::optional<Capsule> tick;
  if (pose[Joint::kNose].visible()) {
    const auto& le = pose[Joint::kLeftEar];
    const auto& re = pose[Joint::kRightEar];
    double r = style.head_fallback_fraction * torso;
    if (le.visible() && re.visible()) r = style.head_radius_fraction * (le.pt() - re.pt()).norm();
    r = std::max(r, bone_r);
    head = Disc{pose[Joint::kNose].pt(), r};
    if (pose.head_yaw) {
      const double yaw = *pose.head_yaw;
      const Point2 dir{std::sin(yaw), std::cos(yaw)};
      tick = Capsule{head->centre, head->centre + dir * (r + style.tick_overhang), 1.0};
    }
  }

  // Union bounds, clipped to the canvas.
  double x0 = 1e30, y0 = 1e30, x1 = -1e30, y1 = -1e30;
  auto grow = [&](const BoundingBox& b) {
    x0 = std::min(x0, b.x);
    y0 = std::min(y0, b.y);
    x1 = std::max(x1, b.right());
    y1 = std::max(y1, b.bottom());
  };
  for (const auto& c : bones) grow(c.bounds());
  if (head) grow(head->bounds());
  if (tick) grow(tick->bounds());
  const PixelRange range = pixel_range({x0, y0, x1 - x0, y1 - y0}, canvas);

  SkeletalProxy out;
  out.subject_id = subject_id;
  if (range.empty()) {
    out.anchor_x = std::clamp(range.x0, 0, canvas.width);
    out.anchor_y = std::clamp(range.y0, 0, canvas.height);
    return out;
  }
  out.anchor_x = range.x0;
  out.anchor_y = range.y0;
  const int w = range.x1 - range.x0, h = range.y1 - range.y0;

  Bitmap cover(w, h), ticks(w, h);
  auto covered_local = [&](const auto& shape, Bitmap& dst) {
    for_each_covered(shape, canvas, [&](int x, int y) { dst.set(x - range.x0, y - range.y0); });
  };
  for (const auto& c : bones) covered_local(c, cover);
  if (head) covered_local(*head, cover);
  if (tick) {
    covered_local(*tick, ticks);
    covered_local(*tick, cover);
  }

  out.raster = RgbaImage(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!cover.get(x, y)) continue;
      const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 || !cover.get(x - 1, y) ||
                        !cover.get(x + 1, y) || !cover.get(x, y - 1) || !cover.get(x, y + 1);
      const Rgb c = (edge || ticks.get(x, y)) ? kProxyOutline : kProxyFill;
      out.raster.set(x, y, {c.r, c.g, c.b, 255});
    }

  if (style.subject_tags && head) {
    // Draw the id digits just above the head, clipped to the patch.
    const std::string digits = std::to_string(subject_id);
    const int tx = static_cast<int>(head->centre.x) - range.x0 - 2 * static_cast<int>(digits.size());
    const int ty = static_cast<int>(head->centre.y - head->radius) - range.y0 - 6;
    for (std::size_t d = 0; d < digits.size(); ++d) {
      const auto glyph = proxy_detail::kDigits[digits[d] - '0'];
      for (int gy = 0; gy < 5; ++gy)
        for (int gx = 0; gx < 3; ++gx) {
          if (!((glyph >> (14 - (gy * 3 + gx))) & 1)) continue;
          const int px = tx + static_cast<int>(d) * 4 + gx, py = ty + gy;
          if (px >= 0 && py >= 0 && px < w && py < h)
            out.raster.set(px, py, {kProxyOutline.r, kProxyOutline.g, kProxyOutline.b, 255});
        }
    }
  }
  return out;
}

}  // namespace pcv::edge
