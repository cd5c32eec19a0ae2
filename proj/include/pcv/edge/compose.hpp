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
#include <map>
#include <set>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/edge/types.hpp"

namespace pcv::edge {

// Back-to-front order from the ankle midpoint's image row (smaller v is
// farther away). Subjects with both ankles invisible fall back to the bottom
// edge of their track's constant-velocity prediction. Ties go to the lower
// subject_id first.
inline OcclusionOrder occlusion_order(const std::vector<Track>& tracks,
                                      const std::map<SubjectId, KeypointSet>& poses) {
  struct Keyed {
    double depth;
    SubjectId id;
  };
  std::vector<Keyed> keyed;
  for (const auto& [id, pose] : poses) {
    double depth = 0;
    if (auto ankle = pose.ankle_mid()) {
      depth = ankle->y;
    } else {
      auto it = std::find_if(tracks.begin(), tracks.end(), [id = id](const Track& t) { return t.subject_id == id; });
      require(it != tracks.end(), ErrorKind::kValidation,
              "occlusion_order: pose for unknown subject " + std::to_string(id));
      depth = it->prior.bottom();
    }
    keyed.push_back({depth, id});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return a.depth != b.depth ? a.depth < b.depth : a.id < b.id;
  });
  OcclusionOrder out;
  out.reserve(keyed.size());
  for (const auto& k : keyed) out.push_back(k.id);
  return out;
}

inline bool is_permutation_of(const OcclusionOrder& order, const std::vector<SubjectId>& ids) {
  if (order.size() != ids.size()) return false;
  std::multiset<SubjectId> a(order.begin(), order.end()), b(ids.begin(), ids.end());
  return a == b && std::set<SubjectId>(order.begin(), order.end()).size() == order.size();
}

// Source-over with 8-bit alpha. alpha 255 copies the source, 0 keeps dst.
inline std::uint8_t blend_channel(std::uint8_t src, std::uint8_t dst, std::uint8_t alpha) {
  return static_cast<std::uint8_t>((src * alpha + dst * (255 - alpha) + 127) / 255);
}

inline void blit(RgbImage& dst, const SkeletalProxy& proxy) {
  for (int y = 0; y < proxy.raster.height(); ++y)
    for (int x = 0; x < proxy.raster.width(); ++x) {
      const int fx = proxy.anchor_x + x, fy = proxy.anchor_y + y;
      if (!dst.contains(fx, fy)) continue;
      const Rgba s = proxy.raster.at(x, y);
      if (s.a == 0) continue;
      std::uint8_t* d = dst.px(fx, fy);
      d[0] = blend_channel(s.r, d[0], s.a);
      d[1] = blend_channel(s.g, d[1], s.a);
      d[2] = blend_channel(s.b, d[2], s.a);
    }
}

// Painter's algorithm over the desensitized frame.
inline AnonymizedComposite overlay(const DesensitizedFrame& desensitized, const std::vector<SkeletalProxy>& proxies,
                                   const OcclusionOrder& order) {
  std::vector<SubjectId> ids;
  for (const auto& p : proxies) ids.push_back(p.subject_id);
  require(is_permutation_of(order, ids), ErrorKind::kValidation,
          "overlay: order is not a permutation of the proxy subject ids");
  AnonymizedComposite out{desensitized.image};
  for (SubjectId id : order) {
    auto it = std::find_if(proxies.begin(), proxies.end(), [id](const SkeletalProxy& p) { return p.subject_id == id; });
    blit(out.image, *it);
  }
  return out;
}

// Fixed encoder: mean luminance over an 8x8 grid, scaled to [0,1].
inline VisionEmbedding embed(const RgbImage& img) {
  require(!img.empty(), ErrorKind::kValidation, "embed: empty image");
  VisionEmbedding out;
  const int w = img.width(), h = img.height();
  for (int gy = 0; gy < 8; ++gy) {
    const int y0 = gy * h / 8, y1 = (gy + 1) * h / 8;
    for (int gx = 0; gx < 8; ++gx) {
      const int x0 = gx * w / 8, x1 = (gx + 1) * w / 8;
      double sum = 0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) sum += luminance(img.at(x, y));
      const double n = double(x1 - x0) * double(y1 - y0);
      const double v = n > 0 ? sum / n / 255.0 : 0.0;
      out.values[gy * 8 + gx] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

inline VisionEmbedding embed(const AnonymizedComposite& composite) { return embed(composite.image); }

}  // namespace pcv::edge
