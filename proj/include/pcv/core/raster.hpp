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
#include <cmath>

#include "pcv/core/image.hpp"
#include "pcv/core/skeleton.hpp"

namespace pcv {

// Binary coverage primitives. A pixel (x, y) is covered when its centre
// (x + 0.5, y + 0.5) lies inside the shape; no antialiasing.

struct Capsule {
  Point2 a;
  Point2 b;
  double radius = 1;

  bool contains(Point2 p) const {
    const Point2 ab = b - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    double t = 0;
    if (len2 > 0) t = std::clamp(((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2, 0.0, 1.0);
    const Point2 q = a + ab * t;
    const double dx = p.x - q.x, dy = p.y - q.y;
    return dx * dx + dy * dy <= radius * radius;
  }

  BoundingBox bounds() const {
    const double x0 = std::min(a.x, b.x) - radius, y0 = std::min(a.y, b.y) - radius;
    const double x1 = std::max(a.x, b.x) + radius, y1 = std::max(a.y, b.y) + radius;
    return {x0, y0, x1 - x0, y1 - y0};
  }
};

struct Disc {
  Point2 centre;
  double radius = 1;

  bool contains(Point2 p) const {
    const double dx = p.x - centre.x, dy = p.y - centre.y;
    return dx * dx + dy * dy <= radius * radius;
  }
  BoundingBox bounds() const {
    return {centre.x - radius, centre.y - radius, 2 * radius, 2 * radius};
  }
};

// Integer pixel range [x0, x1) × [y0, y1) covering `box`, clipped to `canvas`.
struct PixelRange {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty() const { return x0 >= x1 || y0 >= y1; }
};

inline PixelRange pixel_range(const BoundingBox& box, Size canvas) {
  PixelRange r;
  r.x0 = std::max(0, static_cast<int>(std::floor(box.x)));
  r.y0 = std::max(0, static_cast<int>(std::floor(box.y)));
  r.x1 = std::min(canvas.width, static_cast<int>(std::ceil(box.right())) + 1);
  r.y1 = std::min(canvas.height, static_cast<int>(std::ceil(box.bottom())) + 1);
  return r;
}

template <typename Shape, typename Fn>
void for_each_covered(const Shape& shape, Size canvas, Fn&& fn) {
  const PixelRange r = pixel_range(shape.bounds(), canvas);
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x)
      if (shape.contains({x + 0.5, y + 0.5})) fn(x, y);
}

template <typename Shape>
void paint(Bitmap& mask, const Shape& shape) {
  for_each_covered(shape, mask.size(), [&](int x, int y) { mask.set(x, y); });
}

}  // namespace pcv
