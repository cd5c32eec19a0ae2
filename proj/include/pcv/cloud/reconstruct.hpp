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
#include <vector>

#include "pcv/cloud/infer.hpp"
#include "pcv/core/png.hpp"
#include "pcv/edge/compose.hpp"
#include "pcv/edge/proxy.hpp"
#include "pcv/transport/wire.hpp"

namespace pcv::cloud {

struct ReconstructedScene {
  RgbImage raster;
  transport::SyncKey key;
};

// Source-over for straight-alpha RGBA onto RGBA.
inline void composite_over(RgbaImage& dst, const SkeletalProxy& proxy) {
  for (int y = 0; y < proxy.raster.height(); ++y)
    for (int x = 0; x < proxy.raster.width(); ++x) {
      const int fx = proxy.anchor_x + x, fy = proxy.anchor_y + y;
      if (!dst.contains(fx, fy)) continue;
      const Rgba s = proxy.raster.at(x, y);
      if (s.a == 0) continue;
      const Rgba d = dst.at(fx, fy);
      const int a = s.a + d.a * (255 - s.a) / 255;
      auto ch = [&](int sc, int dc) {
        const int num = sc * s.a * 255 + dc * d.a * (255 - s.a);
        return static_cast<std::uint8_t>(a > 0 ? (num + a * 255 / 2) / (a * 255) : 0);
      };
      dst.set(fx, fy, {ch(s.r, d.r), ch(s.g, d.g), ch(s.b, d.b), static_cast<std::uint8_t>(a)});
    }
}

// Proxy layer from poses alone, painted in `order`. Boxes come from the
// keypoint extent since the detector's box never leaves the edge.
inline RgbaImage render_proxy_cloud(const std::vector<SubjectPose>& poses, const OcclusionOrder& order, Size canvas,
                                    const edge::ProxyStyle& style = {}) {
  std::vector<SubjectId> ids;
  for (const auto& p : poses) ids.push_back(p.subject_id);
  require(edge::is_permutation_of(order, ids), ErrorKind::kValidation,
          "render_proxy_cloud: order is not a permutation of the pose subject ids");
  RgbaImage out(canvas);
  for (SubjectId id : order) {
    const auto it = std::find_if(poses.begin(), poses.end(), [id](const SubjectPose& p) { return p.subject_id == id; });
    const BoundingBox box = keypoint_box(it->pose).value_or(BoundingBox{});
    composite_over(out, edge::render_proxy(it->pose, box, canvas, id, style));
  }
  return out;
}

inline ReconstructedScene reconstruct(const RgbImage& env, const RgbaImage& proxy_image,
                                      const transport::SyncKey& key = {}) {
  require(env.size() == proxy_image.size(), ErrorKind::kValidation, "reconstruct: dimension mismatch");
  ReconstructedScene out{env, key};
  for (int y = 0; y < env.height(); ++y)
    for (int x = 0; x < env.width(); ++x) {
      const Rgba s = proxy_image.at(x, y);
      if (s.a == 0) continue;
      std::uint8_t* d = out.raster.px(x, y);
      d[0] = edge::blend_channel(s.r, d[0], s.a);
      d[1] = edge::blend_channel(s.g, d[1], s.a);
      d[2] = edge::blend_channel(s.b, d[2], s.a);
    }
  return out;
}

struct CloudFrame {
  BehaviorReport report;
  ReconstructedScene scene;
};

// Full cloud step for one in-order tuple.
inline CloudFrame process_tuple(CloudSession& session, const transport::RepresentationTuple& t,
                                const edge::ProxyStyle& style = {}) {
  const RgbImage env = decode_png(t.env_png);
  const RgbaImage layer = render_proxy_cloud(t.poses, t.order, env.size(), style);
  CloudFrame out{session.accept(t), reconstruct(env, layer, t.key)};
  return out;
}

}  // namespace pcv::cloud
