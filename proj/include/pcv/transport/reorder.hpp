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

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/transport/wire.hpp"

namespace pcv::transport {

enum class DeliveryEventKind { kGap, kDuplicate, kOverflow };

inline std::string_view to_string(DeliveryEventKind k) {
  switch (k) {
    case DeliveryEventKind::kGap:
      return "gap";
    case DeliveryEventKind::kDuplicate:
      return "duplicate";
    case DeliveryEventKind::kOverflow:
      return "overflow";
  }
  return "?";
}

struct DeliveryEvent {
  DeliveryEventKind kind;
  std::uint32_t camera_id = 0;
  std::uint64_t frame_id = 0;

  friend bool operator==(const DeliveryEvent&, const DeliveryEvent&) = default;
};

struct Delivery {
  std::vector<RepresentationTuple> released;  // strictly increasing frame_id
  std::vector<DeliveryEvent> events;
};

struct ReorderConfig {
  std::size_t capacity = 64;
  // A missing frame is given up on once a frame more than this far past it
  // has arrived.
  std::uint64_t gap_frames = 30;
  std::chrono::milliseconds gap_timeout{2000};
  // Frame id expected first. Unset: the first arrival defines it.
  std::optional<std::uint64_t> first_frame_id;
};

using Clock = std::function<std::chrono::steady_clock::time_point()>;

inline Clock steady_clock_source() {
  return [] { return std::chrono::steady_clock::now(); };
}

// Per-camera in-order delivery with gap and duplicate detection.
class ReorderBuffer {
 public:
  explicit ReorderBuffer(ReorderConfig cfg = {}, Clock clock = steady_clock_source())
      : cfg_(cfg), clock_(std::move(clock)), next_(cfg.first_frame_id) {
    require(cfg_.capacity >= 1, ErrorKind::kValidation, "reorder capacity must be >= 1");
  }

  const ReorderConfig& config() const { return cfg_; }
  std::size_t pending() const { return pending_.size(); }
  std::optional<std::uint64_t> expected() const { return next_; }

  Delivery accept(RepresentationTuple t) {
    Delivery out;
    const std::uint64_t f = t.key.frame_id;
    if (camera_ && *camera_ != t.key.camera_id)
      fail(ErrorKind::kValidation, "reorder buffer is bound to camera " + std::to_string(*camera_));
    camera_ = t.key.camera_id;
    if (!next_) next_ = f;
    if (f < *next_ || pending_.count(f)) {
      out.events.push_back({DeliveryEventKind::kDuplicate, *camera_, f});
      advance(out);
      return out;
    }
    newest_ = std::max(newest_.value_or(f), f);
    pending_.emplace(f, std::move(t));
    advance(out);
    while (pending_.size() > cfg_.capacity) {
      out.events.push_back({DeliveryEventKind::kOverflow, *camera_, *next_});
      declare_gap(out);
      release(out);
    }
    return out;
  }

  // Applies the wall-clock rule without a new arrival.
  Delivery poll() {
    Delivery out;
    advance(out);
    return out;
  }

  // End of stream: every remaining hole is a gap; everything pending is released.
  Delivery drain() {
    Delivery out;
    while (!pending_.empty()) {
      release(out);
      if (!pending_.empty()) declare_gap(out);
    }
    return out;
  }

 private:
  void release(Delivery& out) {
    for (auto it = pending_.find(*next_); it != pending_.end(); it = pending_.find(*next_)) {
      out.released.push_back(std::move(it->second));
      pending_.erase(it);
      ++*next_;
      blocked_since_.reset();
    }
  }

  void declare_gap(Delivery& out) {
    out.events.push_back({DeliveryEventKind::kGap, camera_.value_or(0), *next_});
    ++*next_;
  }

  void advance(Delivery& out) {
    if (!next_) return;
    release(out);
    while (!pending_.empty()) {
      const auto now = clock_();
      if (!blocked_since_) blocked_since_ = now;
      const bool far = newest_ && *newest_ > *next_ + cfg_.gap_frames;
      const bool stale = now - *blocked_since_ >= cfg_.gap_timeout;
      if (!far && !stale) break;
      declare_gap(out);
      release(out);
    }
  }

  ReorderConfig cfg_;
  Clock clock_;
  std::optional<std::uint64_t> next_;
  std::optional<std::uint64_t> newest_;
  std::optional<std::uint32_t> camera_;
  std::map<std::uint64_t, RepresentationTuple> pending_;
  std::optional<std::chrono::steady_clock::time_point> blocked_since_;
};

}  // namespace pcv::transport
