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

// Binary packet codec for representation tuples.
//
// Layout (all integers and floats little-endian):
//
//   "PCV2" | version u8 | flags u8
//   camera_id u32 | frame_id u64 | timestamp_us u64
//   env:       len u32, PNG bytes
//   poses:     count u16, then per subject
//                subject_id u32, head_present u8, head_yaw f32,
//                17 x (u f32, v f32, rho f32)
//   order:     count u16, subject_id u32 each (back to front)
//   embedding: dim u16 (= 64), 64 x f32
//   crc32 u32 (IEEE) over every preceding byte

#pragma once

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/edge/types.hpp"

namespace pcv::transport {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kMagic[4] = {'P', 'C', 'V', '2'};
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::uint8_t kReservedFlags = 0xFF;  // no flag bits are defined in version 1

struct SyncKey {
  std::uint32_t camera_id = 0;
  std::uint64_t frame_id = 0;
  std::uint64_t timestamp_us = 0;

  friend bool operator==(const SyncKey&, const SyncKey&) = default;
};

// Everything that crosses the link for one frame.
struct RepresentationTuple {
  SyncKey key;
  std::uint8_t flags = 0;
  Bytes env_png;
  std::vector<SubjectPose> poses;
  OcclusionOrder order;
  VisionEmbedding embedding;

  friend bool operator==(const RepresentationTuple&, const RepresentationTuple&) = default;
};

inline std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes) {
  uLong c = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; packets are far below 4 GiB.
  c = crc32(c, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(c);
}

// True when poses and order name the same subject set, without repeats.
inline bool ids_consistent(const RepresentationTuple& t) {
  std::set<SubjectId> pose_ids, order_ids;
  for (const auto& p : t.poses) pose_ids.insert(p.subject_id);
  for (SubjectId id : t.order) order_ids.insert(id);
  return pose_ids.size() == t.poses.size() && order_ids.size() == t.order.size() && pose_ids == order_ids;
}

namespace wire_detail {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
  void raw(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  Bytes& bytes() { return out_; }

 private:
  template <typename T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::uint8_t u8() { return le<std::uint8_t>(); }
  std::uint16_t u16() { return le<std::uint16_t>(); }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) fail(ErrorKind::kStructure, "packet truncated at offset " + std::to_string(pos_));
  }
  template <typename T>
  T le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(T(b_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

inline constexpr std::size_t kHeaderBytes = 4 + 1 + 1 + 4 + 8 + 8;
inline constexpr std::size_t kMinPacketBytes = kHeaderBytes + 4 + 2 + 2 + 2 + 4;

}  // namespace wire_detail

// Canonical encoding: equal tuples give identical bytes. Refuses tuples whose
// poses and order disagree.
inline Bytes encode(const RepresentationTuple& t) {
  require(ids_consistent(t), ErrorKind::kConsistency, "encode: pose and order subject ids differ");
  require(t.poses.size() <= 0xFFFF, ErrorKind::kValidation, "encode: too many poses");
  require(t.env_png.size() <= 0xFFFFFFFFu, ErrorKind::kValidation, "encode: env image too large");

  wire_detail::Writer w;
  w.raw(kMagic);
  w.u8(kWireVersion);
  w.u8(t.flags);
  w.u32(t.key.camera_id);
  w.u64(t.key.frame_id);
  w.u64(t.key.timestamp_us);

  w.u32(static_cast<std::uint32_t>(t.env_png.size()));
  w.raw(t.env_png);

  w.u16(static_cast<std::uint16_t>(t.poses.size()));
  for (const auto& p : t.poses) {
    w.u32(p.subject_id);
    w.u8(p.pose.head_yaw ? 1 : 0);
    w.f32(p.pose.head_yaw.value_or(0.0f));
    for (const auto& k : p.pose.joints) {
      w.f32(k.u);
      w.f32(k.v);
      w.f32(k.rho);
    }
  }

  w.u16(static_cast<std::uint16_t>(t.order.size()));
  for (SubjectId id : t.order) w.u32(id);

  w.u16(static_cast<std::uint16_t>(kEmbeddingDim));
  for (float v : t.embedding.values) w.f32(v);

  const std::uint32_t crc = crc32_ieee(w.bytes());
  w.u32(crc);
  return std::move(w.bytes());
}

// Checks run in order: magic, version, minimum length, CRC, then section
// structure and subject-id consistency.
inline RepresentationTuple decode(std::span<const std::uint8_t> packet) {
  if (packet.size() < 4 || std::memcmp(packet.data(), kMagic, 4) != 0)
    fail(ErrorKind::kProtocol, "bad magic");
  if (packet.size() < 5 || packet[4] != kWireVersion)
    fail(ErrorKind::kVersion, packet.size() < 5 ? "missing version" : "unknown version " + std::to_string(packet[4]));
  if (packet.size() < wire_detail::kMinPacketBytes) fail(ErrorKind::kStructure, "packet shorter than minimum");

  const std::size_t body = packet.size() - 4;
  wire_detail::Reader tail(packet.subspan(body));
  if (tail.u32() != crc32_ieee(packet.first(body))) fail(ErrorKind::kIntegrity, "CRC32 mismatch");

  wire_detail::Reader r(packet.first(body));
  r.raw(5);
  RepresentationTuple t;
  t.flags = r.u8();
  t.key.camera_id = r.u32();
  t.key.frame_id = r.u64();
  t.key.timestamp_us = r.u64();

  const std::uint32_t env_len = r.u32();
  const auto env = r.raw(env_len);
  t.env_png.assign(env.begin(), env.end());

  const std::uint16_t pose_count = r.u16();
  t.poses.resize(pose_count);
  for (auto& p : t.poses) {
    p.subject_id = r.u32();
    const std::uint8_t head = r.u8();
    const float yaw = r.f32();
    if (head > 1) fail(ErrorKind::kStructure, "head_present flag must be 0 or 1");
    if (head == 0 && std::bit_cast<std::uint32_t>(yaw) != 0)
      fail(ErrorKind::kStructure, "head_yaw must be zero when absent");
    if (head) p.pose.head_yaw = yaw;
    for (auto& k : p.pose.joints) {
      k.u = r.f32();
      k.v = r.f32();
      k.rho = r.f32();
    }
  }

  const std::uint16_t order_count = r.u16();
  t.order.resize(order_count);
  for (auto& id : t.order) id = r.u32();

  if (r.u16() != kEmbeddingDim) fail(ErrorKind::kStructure, "embedding dimension must be 64");
  for (auto& v : t.embedding.values) v = r.f32();

  if (r.remaining() != 0) fail(ErrorKind::kStructure, "trailing bytes after embedding");
  if (!ids_consistent(t)) fail(ErrorKind::kConsistency, "pose and order subject ids differ");
  return t;
}

}  // namespace pcv::transport
