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
#include <cstdint>
#include <string_view>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/core/image.hpp"
#include "pcv/core/skeleton.hpp"

namespace pcv {

using SubjectId = std::uint32_t;

enum class PerceptionMode { kOracle, kHeuristic };

inline std::string_view to_string(PerceptionMode m) {
  return m == PerceptionMode::kOracle ? "oracle" : "heuristic";
}

inline PerceptionMode parse_mode(std::string_view s) {
  if (s == "oracle") return PerceptionMode::kOracle;
  if (s == "heuristic") return PerceptionMode::kHeuristic;
  fail(ErrorKind::kConfiguration, "unknown mode '" + std::string(s) + "'");
}

struct Detection {
  BoundingBox box;
  double score = 1.0;
};

struct Track {
  SubjectId subject_id = 0;
  BoundingBox box;
  Point2 velocity;     // px/frame, box centre
  int age = 1;         // frames since spawn, >= 1
  int misses = 0;      // consecutive frames without a detection
  BoundingBox prior;   // constant-velocity prediction for this frame
  int detection = -1;  // index of the matched detection this frame, or -1

  bool matched() const { return detection >= 0; }
};

struct SubjectPose {
  SubjectId subject_id = 0;
  KeypointSet pose;

  friend bool operator==(const SubjectPose&, const SubjectPose&) = default;
};

// Back-to-front rendering order of subjects.
using OcclusionOrder = std::vector<SubjectId>;

// Frame after pixel erasure.
struct DesensitizedFrame {
  RgbImage image;
};

// Desensitized frame with skeletal proxies overlaid.
struct AnonymizedComposite {
  RgbImage image;
};

struct SkeletalProxy {
  RgbaImage raster;
  int anchor_x = 0;  // top-left of `raster` in frame coordinates
  int anchor_y = 0;
  SubjectId subject_id = 0;

  friend bool operator==(const SkeletalProxy&, const SkeletalProxy&) = default;
};

inline constexpr int kEmbeddingDim = 64;

struct VisionEmbedding {
  std::array<float, kEmbeddingDim> values{};
  friend bool operator==(const VisionEmbedding&, const VisionEmbedding&) = default;
};

// Proxy palette.
inline constexpr Rgb kProxyFill{180, 180, 180};
inline constexpr Rgb kProxyOutline{60, 60, 60};
inline constexpr Rgb kNeverSeenFill{128, 128, 128};

}  // namespace pcv
