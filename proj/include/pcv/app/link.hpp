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

#include "pcv/core/png.hpp"
#include "pcv/edge/pipeline.hpp"
#include "pcv/transport/wire.hpp"

namespace pcv::app {

// Stream clock: frame k is stamped k / fps seconds after the stream start.
inline transport::SyncKey sync_key(std::uint32_t camera_id, std::uint64_t frame_id, double fps) {
  require(fps > 0, ErrorKind::kValidation, "fps must be positive");
  const auto us = static_cast<std::uint64_t>(std::llround(static_cast<double>(frame_id) * 1e6 / fps));
  return {camera_id, frame_id, us};
}

// Packs the edge output for one frame. The raw frame is not an input.
inline transport::RepresentationTuple make_tuple(const edge::EdgeOutput& out, const transport::SyncKey& key) {
  transport::RepresentationTuple t;
  t.key = key;
  t.env_png = encode_png(out.desensitized.image);
  t.poses = out.poses;
  t.order = out.order;
  t.embedding = out.embedding;
  return t;
}

}  // namespace pcv::app
