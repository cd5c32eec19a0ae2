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
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcv/core/error.hpp"

namespace pcv {

struct Size {
  int width = 0;
  int height = 0;

  friend bool operator==(const Size&, const Size&) = default;
  std::size_t area() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Rgba {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  std::uint8_t a = 0;

  friend bool operator==(const Rgba&, const Rgba&) = default;
};

// Largest per-channel absolute difference.
inline int channel_distance(Rgb a, Rgb b) {
  return std::max({std::abs(int(a.r) - int(b.r)), std::abs(int(a.g) - int(b.g)),
                   std::abs(int(a.b) - int(b.b))});
}

inline double luminance(Rgb c) {
  return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
}

// Interleaved 8-bit image, row-major, `Channels` bytes per pixel.
template <int Channels>
class Image {
 public:
  static constexpr int kChannels = Channels;

  Image() = default;
  Image(int width, int height, std::uint8_t fill = 0)
      : size_{width, height},
        data_(checked_len(width, height), fill) {}
  Image(Size size, std::uint8_t fill = 0) : Image(size.width, size.height, fill) {}
  Image(int width, int height, std::vector<std::uint8_t> data)
      : size_{width, height}, data_(std::move(data)) {
    require(data_.size() == checked_len(width, height), ErrorKind::kValidation,
            "pixel buffer length does not match dimensions");
  }

  int width() const { return size_.width; }
  int height() const { return size_.height; }
  Size size() const { return size_; }
  bool empty() const { return data_.empty(); }

  std::span<std::uint8_t> bytes() { return data_; }
  std::span<const std::uint8_t> bytes() const { return data_; }
  const std::vector<std::uint8_t>& buffer() const { return data_; }

  std::uint8_t* px(int x, int y) {
    return data_.data() + offset(x, y);
  }
  const std::uint8_t* px(int x, int y) const {
    return data_.data() + offset(x, y);
  }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < size_.width && y < size_.height;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  static std::size_t checked_len(int width, int height) {
    require(width >= 0 && height >= 0, ErrorKind::kValidation,
            "negative image dimensions");
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
           Channels;
  }
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * size_.width + x) * Channels;
  }

  Size size_;
  std::vector<std::uint8_t> data_;
};

class RgbImage : public Image<3> {
 public:
  using Image<3>::Image;

  Rgb at(int x, int y) const {
    const auto* p = px(x, y);
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    auto* p = px(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  void fill(Rgb c) {
    for (int y = 0; y < height(); ++y)
      for (int x = 0; x < width(); ++x) set(x, y, c);
  }
};

class RgbaImage : public Image<4> {
 public:
  using Image<4>::Image;

  Rgba at(int x, int y) const {
    const auto* p = px(x, y);
    return {p[0], p[1], p[2], p[3]};
  }
  void set(int x, int y, Rgba c) {
    auto* p = px(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
    p[3] = c.a;
  }
};

// Raw camera frame. The only type allowed to hold human pixels.
using Frame = RgbImage;

// H×W binary bitmap, one byte per pixel (0 or 1).
class Bitmap {
 public:
  Bitmap() = default;
  Bitmap(int width, int height, bool fill = false)
      : size_{width, height}, bits_(Size{width, height}.area(), fill ? 1 : 0) {}
  explicit Bitmap(Size size, bool fill = false)
      : Bitmap(size.width, size.height, fill) {}

  int width() const { return size_.width; }
  int height() const { return size_.height; }
  Size size() const { return size_; }

  bool get(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * size_.width + x] != 0;
  }
  void set(int x, int y, bool v = true) {
    bits_[static_cast<std::size_t>(y) * size_.width + x] = v ? 1 : 0;
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < size_.width && y < size_.height;
  }

  std::span<const std::uint8_t> bits() const { return bits_; }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
  }

  Bitmap& operator|=(const Bitmap& other) {
    require(other.size_ == size_, ErrorKind::kValidation,
            "mask dimension mismatch");
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
    return *this;
  }

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

 private:
  Size size_;
  std::vector<std::uint8_t> bits_;
};

// Axis-aligned box in pixel coordinates; (x, y) is the top-left corner.
struct BoundingBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return std::max(0.0, w) * std::max(0.0, h); }
  double cx() const { return x + w / 2; }
  double cy() const { return y + h / 2; }

  bool contains(double px, double py) const {
    return px >= x && py >= y && px <= right() && py <= bottom();
  }

  BoundingBox translated(double dx, double dy) const {
    return {x + dx, y + dy, w, h};
  }

  // Grows each dimension by `fraction` around the centre.
  BoundingBox scaled(double fraction) const {
    return {x - w * fraction / 2, y - h * fraction / 2, w * (1 + fraction),
            h * (1 + fraction)};
  }

  BoundingBox dilated(double px) const {
    return {x - px, y - px, w + 2 * px, h + 2 * px};
  }

  BoundingBox clipped(Size s) const {
    const double x0 = std::clamp(x, 0.0, double(s.width));
    const double y0 = std::clamp(y, 0.0, double(s.height));
    const double x1 = std::clamp(right(), 0.0, double(s.width));
    const double y1 = std::clamp(bottom(), 0.0, double(s.height));
    return {x0, y0, x1 - x0, y1 - y0};
  }

  bool within(Size s) const {
    return x >= 0 && y >= 0 && right() <= s.width && bottom() <= s.height;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

// Tight box around set pixels; empty box when nothing is set.
inline BoundingBox bitmap_bounds(const Bitmap& m) {
  int x0 = m.width(), y0 = m.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.get(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) return {};
  return {double(x0), double(y0), double(x1 - x0 + 1), double(y1 - y0 + 1)};
}

}  // namespace pcv
