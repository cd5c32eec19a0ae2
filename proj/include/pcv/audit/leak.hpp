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

#include <array>
#include <cmath>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/core/image.hpp"
#include "pcv/core/png.hpp"
#include "pcv/transport/wire.hpp"

namespace pcv::audit {

inline constexpr int kLeakPatch = 8;
inline constexpr double kLeakThreshold = 0.9;

struct LeakScanResult {
  double peak = 0;  // 0 when no patch qualifies
  int x = -1;       // top-left of the peak patch
  int y = -1;
  int patches = 0;  // patches fully inside the mask

  bool passed(double threshold = kLeakThreshold) const { return peak < threshold; }
};

// Normalized cross-correlation of two 8x8 RGB patches. Each channel is
// centred on its own mean, so flat colour carries no signal; a patch with no
// variation scores 0.
inline double patch_ncc(const RgbImage& a, const RgbImage& b, int x0, int y0) {
  constexpr int n = kLeakPatch * kLeakPatch;
  double sa[3] = {0, 0, 0}, sb[3] = {0, 0, 0};
  for (int y = y0; y < y0 + kLeakPatch; ++y)
    for (int x = x0; x < x0 + kLeakPatch; ++x)
      for (int c = 0; c < 3; ++c) {
        sa[c] += a.px(x, y)[c];
        sb[c] += b.px(x, y)[c];
      }
  double ab = 0, aa = 0, bb = 0;
  for (int y = y0; y < y0 + kLeakPatch; ++y)
    for (int x = x0; x < x0 + kLeakPatch; ++x)
      for (int c = 0; c < 3; ++c) {
        const double da = a.px(x, y)[c] - sa[c] / n;
        const double db = b.px(x, y)[c] - sb[c] / n;
        ab += da * db;
        aa += da * da;
        bb += db * db;
      }
  if (aa <= 1e-12 || bb <= 1e-12) return 0;
  return ab / std::sqrt(aa * bb);
}

// Peak correlation between `env` and `raw` over every 8x8 window lying fully
// inside `mask`.
inline LeakScanResult pixel_leak_scan(const RgbImage& env, const Frame& raw, const Bitmap& mask) {
  require(env.size() == raw.size() && raw.size() == mask.size(), ErrorKind::kValidation,
          "pixel_leak_scan: dimension mismatch");
  const int w = raw.width(), h = raw.height();
  LeakScanResult r;
  if (w < kLeakPatch || h < kLeakPatch) return r;

  // Summed-area table of mask pixels for the inside test.
  std::vector<int> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  auto at = [&](int x, int y) -> int& { return sat[static_cast<std::size_t>(y) * (w + 1) + x]; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) at(x + 1, y + 1) = mask.get(x, y) + at(x, y + 1) + at(x + 1, y) - at(x, y);

  for (int y = 0; y + kLeakPatch <= h; ++y)
    for (int x = 0; x + kLeakPatch <= w; ++x) {
      const int inside =
          at(x + kLeakPatch, y + kLeakPatch) - at(x, y + kLeakPatch) - at(x + kLeakPatch, y) + at(x, y);
      if (inside != kLeakPatch * kLeakPatch) continue;
      ++r.patches;
      const double v = patch_ncc(env, raw, x, y);
      if (r.x < 0 || v > r.peak) {
        r.peak = v;
        r.x = x;
        r.y = y;
      }
    }
  if (r.patches == 0) r.peak = 0;
  return r;
}

inline LeakScanResult pixel_leak_scan(const transport::RepresentationTuple& tuple, const Frame& raw,
                                      const Bitmap& mask) {
  return pixel_leak_scan(decode_png(tuple.env_png), raw, mask);
}

}  // namespace pcv::audit
