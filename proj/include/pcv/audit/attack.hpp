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
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pcv/app/link.hpp"
#include "pcv/cloud/infer.hpp"
#include "pcv/cloud/reconstruct.hpp"
#include "pcv/core/error.hpp"
#include "pcv/edge/pipeline.hpp"
#include "pcv/sim/render.hpp"
#include "pcv/sim/scenarios.hpp"
#include "pcv/transport/wire.hpp"

namespace pcv::audit {

// Feature channels available to the attacker. kCombined sums the scaled
// distances of the other three.
enum class AttackChannel { kEmbedding, kEnvStats, kProxyShape, kCombined };

inline constexpr AttackChannel kAllChannels[] = {AttackChannel::kEmbedding, AttackChannel::kEnvStats,
                                                 AttackChannel::kProxyShape, AttackChannel::kCombined};

inline std::string_view to_string(AttackChannel c) {
  switch (c) {
    case AttackChannel::kEmbedding: return "embedding";
    case AttackChannel::kEnvStats: return "env_patch_stats";
    case AttackChannel::kProxyShape: return "proxy_raster";
    case AttackChannel::kCombined: return "combined";
  }
  return "combined";
}

inline constexpr int kShapeGrid = 8;
inline constexpr int kEnvStats = 12;

// Per-scene attacker view, averaged over the frames where a subject is seen.
struct AttackFeatures {
  std::vector<double> embedding;  // 64
  std::vector<double> env_stats;  // per-channel mean and stddev in the keypoint box, then under the proxy
  std::vector<double> shape;      // 8x8 proxy alpha occupancy inside the keypoint box

  const std::vector<double>& channel(AttackChannel c) const {
    switch (c) {
      case AttackChannel::kEmbedding: return embedding;
      case AttackChannel::kEnvStats: return env_stats;
      default: return shape;
    }
  }
};

struct EnrollmentRecord {
  std::vector<transport::RepresentationTuple> tuples;
  AttackFeatures features;
  AttackFeatures raw_features;  // control view built from the raw frames
};

struct GalleryActor {
  std::string actor_id;
  sim::Appearance appearance;
  std::vector<EnrollmentRecord> enrollment;
};

struct AttackGallery {
  std::vector<GalleryActor> actors;
};

struct AttackConfig {
  int frames_per_scene = 8;
  int enrollment_scenes = 4;
  Size size{320, 240};
  edge::EdgeConfig edge;  // oracle mode by default
};

struct ChannelAccuracy {
  AttackChannel channel = AttackChannel::kCombined;
  int correct = 0;
  double accuracy = 0;
};

struct AttackOutcome {
  std::vector<ChannelAccuracy> channels;
  double accuracy = 0;  // best channel
  AttackChannel best = AttackChannel::kCombined;
  double ci_low = 0;  // 95% Wilson interval of `accuracy`
  double ci_high = 0;
};

struct AttackResult {
  int gallery_size = 0;
  int probes = 0;
  double chance = 0;
  AttackOutcome tuples;   // attacker sees only the transmitted tuples
  AttackOutcome control;  // attacker sees the raw frames

  bool valid(double control_min = 0.95) const { return control.accuracy >= control_min; }
  bool passed(double margin = 0.05, double control_min = 0.95) const {
    return valid(control_min) && tuples.accuracy <= chance + margin;
  }
};

// 95% Wilson score interval for k successes in n trials.
inline std::pair<double, double> wilson_interval(int k, int n, double z = 1.959963984540054) {
  if (n <= 0) return {0, 1};
  const double p = double(k) / n, z2 = z * z;
  const double denom = 1 + z2 / n;
  const double centre = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

inline void validate(const AttackGallery& g, bool need_enrollment = true) {
  require(g.actors.size() >= 2, ErrorKind::kValidation, "attack gallery needs at least 2 actors");
  for (std::size_t i = 0; i < g.actors.size(); ++i) {
    require(!need_enrollment || !g.actors[i].enrollment.empty(), ErrorKind::kValidation,
            "gallery actor '" + g.actors[i].actor_id + "' has no enrollment");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& a = g.actors[i].appearance;
      const auto& b = g.actors[j].appearance;
      require(channel_distance(a.clothing, b.clothing) >= 64 && channel_distance(a.skin, b.skin) >= 64,
              ErrorKind::kValidation,
              "gallery actors '" + g.actors[j].actor_id + "' and '" + g.actors[i].actor_id +
                  "' have duplicate or near-duplicate appearances");
    }
  }
}

namespace attack_detail {

class Accumulator {
 public:
  void add(const RgbImage& env, const std::vector<SubjectPose>& poses, const OcclusionOrder& order,
           const VisionEmbedding& z) {
    if (poses.empty()) return;
    ++frames_;
    for (int i = 0; i < kEmbeddingDim; ++i) embedding_[i] += z.values[i];

    const KeypointSet& pose = poses.front().pose;
    const auto box = cloud::keypoint_box(pose);
    if (!box) return;
    const PixelRange r = pixel_range(*box, env.size());
    const RgbaImage layer = cloud::render_proxy_cloud(poses, order, env.size());
    // Colour moments over the whole box and over the proxy silhouette.
    std::array<double, 3> sum_box{}, sq_box{}, sum_body{}, sq_body{};
    int n_box = 0, n_body = 0;
    std::array<int, kShapeGrid * kShapeGrid> hits{}, cells{};
    for (int y = r.y0; y < r.y1; ++y)
      for (int x = r.x0; x < r.x1; ++x) {
        const bool body = layer.at(x, y).a > 0;
        ++n_box;
        n_body += body;
        for (int c = 0; c < 3; ++c) {
          const double v = env.px(x, y)[c];
          sum_box[c] += v;
          sq_box[c] += v * v;
          if (body) {
            sum_body[c] += v;
            sq_body[c] += v * v;
          }
        }
        const int gx = std::min(kShapeGrid - 1, (x - r.x0) * kShapeGrid / std::max(1, r.x1 - r.x0));
        const int gy = std::min(kShapeGrid - 1, (y - r.y0) * kShapeGrid / std::max(1, r.y1 - r.y0));
        ++cells[gy * kShapeGrid + gx];
        hits[gy * kShapeGrid + gx] += body;
      }
    auto moments = [&](const std::array<double, 3>& sum, const std::array<double, 3>& sq, int n, int at) {
      if (n == 0) return;
      for (int c = 0; c < 3; ++c) {
        const double mean = sum[c] / n;
        stats_[at + c] += mean;
        stats_[at + 3 + c] += std::sqrt(std::max(0.0, sq[c] / n - mean * mean));
      }
    };
    moments(sum_box, sq_box, n_box, 0);
    moments(sum_body, sq_body, n_body, 6);
    for (int i = 0; i < kShapeGrid * kShapeGrid; ++i)
      if (cells[i] > 0) shape_[i] += double(hits[i]) / cells[i];
    ++boxed_;
  }

  AttackFeatures finish() const {
    AttackFeatures f;
    f.embedding.assign(kEmbeddingDim, 0);
    f.env_stats.assign(kEnvStats, 0);
    f.shape.assign(kShapeGrid * kShapeGrid, 0);
    if (frames_ > 0)
      for (int i = 0; i < kEmbeddingDim; ++i) f.embedding[i] = embedding_[i] / frames_;
    if (boxed_ > 0) {
      for (int i = 0; i < kEnvStats; ++i) f.env_stats[i] = stats_[i] / boxed_;
      for (int i = 0; i < kShapeGrid * kShapeGrid; ++i) f.shape[i] = shape_[i] / boxed_;
    }
    return f;
  }

 private:
  int frames_ = 0;
  int boxed_ = 0;
  std::array<double, kEmbeddingDim> embedding_{};
  std::array<double, kEnvStats> stats_{};
  std::array<double, kShapeGrid * kShapeGrid> shape_{};
};

// One simulated scene through the edge pipeline and the wire codec.
inline EnrollmentRecord run_scene(const sim::SceneSpec& spec, const AttackConfig& cfg, bool keep_tuples) {
  const auto scene = sim::generate_scene(spec);
  edge::EdgeState state(cfg.size, cfg.edge);
  Accumulator seen, raw;
  EnrollmentRecord rec;
  for (int t = 0; t < spec.frame_count; ++t) {
    const auto out = edge::process_frame(scene.frames[t], state, &scene.ground_truth[t]);
    const auto wire = transport::encode(app::make_tuple(out, app::sync_key(0, t, 30)));
    auto tuple = transport::decode(wire);
    seen.add(decode_png(tuple.env_png), tuple.poses, tuple.order, tuple.embedding);
    raw.add(scene.frames[t], tuple.poses, tuple.order, edge::embed(scene.frames[t]));
    if (keep_tuples) rec.tuples.push_back(std::move(tuple));
  }
  rec.features = seen.finish();
  rec.raw_features = raw.finish();
  return rec;
}

// Centring per dimension and one scale per channel, fitted on the enrollment
// set. A single scale keeps near-constant dimensions from dominating.
struct Standardizer {
  std::vector<double> mean;
  double inv_scale = 0;

  static Standardizer fit(const std::vector<const std::vector<double>*>& rows) {
    Standardizer s;
    const std::size_t d = rows.empty() ? 0 : rows.front()->size();
    s.mean.assign(d, 0);
    for (const auto* r : rows)
      for (std::size_t i = 0; i < d; ++i) s.mean[i] += (*r)[i];
    for (auto& m : s.mean) m /= std::max<std::size_t>(1, rows.size());
    double var = 0;
    for (const auto* r : rows)
      for (std::size_t i = 0; i < d; ++i) var += ((*r)[i] - s.mean[i]) * ((*r)[i] - s.mean[i]);
    var /= std::max<std::size_t>(1, rows.size() * d);
    s.inv_scale = var > 1e-18 ? 1.0 / std::sqrt(var) : 0.0;
    return s;
  }

  // Mean squared scaled difference, so each channel has comparable weight.
  double distance(const std::vector<double>& a, const std::vector<double>& b) const {
    if (a.empty()) return 0;
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = (a[i] - b[i]) * inv_scale;
      s += d * d;
    }
    return s / a.size();
  }
};

struct Probe {
  int actor = 0;
  AttackFeatures features;
  AttackFeatures raw_features;
};

// Nearest enrollment scene per channel; ties go to the lowest actor index.
inline AttackOutcome score(const AttackGallery& g, const std::vector<Probe>& probes, bool raw) {
  const AttackChannel single[] = {AttackChannel::kEmbedding, AttackChannel::kEnvStats, AttackChannel::kProxyShape};
  auto view = [raw](const EnrollmentRecord& e) -> const AttackFeatures& { return raw ? e.raw_features : e.features; };
  auto pview = [raw](const Probe& p) -> const AttackFeatures& { return raw ? p.raw_features : p.features; };

  std::array<Standardizer, 3> norm;
  for (int c = 0; c < 3; ++c) {
    std::vector<const std::vector<double>*> rows;
    for (const auto& a : g.actors)
      for (const auto& e : a.enrollment) rows.push_back(&view(e).channel(single[c]));
    norm[c] = Standardizer::fit(rows);
  }

  AttackOutcome out;
  std::array<int, 4> correct{};
  for (const auto& p : probes) {
    std::array<double, 4> best;
    best.fill(std::numeric_limits<double>::infinity());
    std::array<int, 4> who{};
    for (std::size_t a = 0; a < g.actors.size(); ++a)
      for (const auto& e : g.actors[a].enrollment) {
        std::array<double, 4> d{};
        for (int c = 0; c < 3; ++c) {
          d[c] = norm[c].distance(pview(p).channel(single[c]), view(e).channel(single[c]));
          d[3] += d[c];
        }
        for (int c = 0; c < 4; ++c)
          if (d[c] < best[c]) {
            best[c] = d[c];
            who[c] = static_cast<int>(a);
          }
      }
    for (int c = 0; c < 4; ++c) correct[c] += who[c] == p.actor;
  }
  const int n = static_cast<int>(probes.size());
  for (int c = 0; c < 4; ++c) {
    ChannelAccuracy ca{kAllChannels[c], correct[c], n > 0 ? double(correct[c]) / n : 0};
    out.channels.push_back(ca);
    if (c == 0 || ca.accuracy > out.accuracy) {
      out.accuracy = ca.accuracy;
      out.best = ca.channel;
    }
  }
  const int k = static_cast<int>(std::lround(out.accuracy * n));
  std::tie(out.ci_low, out.ci_high) = wilson_interval(k, n);
  return out;
}

}  // namespace attack_detail

// Enrolls `appearances` with `cfg.enrollment_scenes` random scenes each.
inline AttackGallery build_gallery(const std::vector<sim::Appearance>& appearances, std::uint64_t seed,
                                   const AttackConfig& cfg = {}, bool keep_tuples = false) {
  require(cfg.enrollment_scenes >= 1 && cfg.frames_per_scene >= 1, ErrorKind::kValidation,
          "attack config needs at least one enrollment scene and frame");
  AttackGallery g;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < appearances.size(); ++i) {
    GalleryActor a{"actor" + std::to_string(i), appearances[i], {}};
    g.actors.push_back(std::move(a));
  }
  validate(g, false);
  for (std::size_t i = 0; i < g.actors.size(); ++i)
    for (int k = 0; k < cfg.enrollment_scenes; ++k) {
      const auto spec =
          sim::identity_scene(g.actors[i].actor_id, g.actors[i].appearance, rng(), cfg.frames_per_scene, cfg.size);
      g.actors[i].enrollment.push_back(attack_detail::run_scene(spec, cfg, keep_tuples));
    }
  return g;
}

// Probes the gallery with `probe_scenes` fresh scenes, each showing one
// gallery actor chosen uniformly at random, and reports nearest-neighbour
// re-identification accuracy on the tuples and on the raw frames.
inline AttackResult identity_attack(const AttackGallery& gallery, int probe_scenes, std::uint64_t seed,
                                    const AttackConfig& cfg = {}) {
  validate(gallery);
  require(probe_scenes >= 1, ErrorKind::kPrecondition, "identity_attack: probe_scenes must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(gallery.actors.size()) - 1);
  std::vector<attack_detail::Probe> probes;
  probes.reserve(probe_scenes);
  for (int i = 0; i < probe_scenes; ++i) {
    const int who = pick(rng);
    const auto& actor = gallery.actors[who];
    const auto spec = sim::identity_scene(actor.actor_id, actor.appearance, rng(), cfg.frames_per_scene, cfg.size);
    auto rec = attack_detail::run_scene(spec, cfg, false);
    probes.push_back({who, std::move(rec.features), std::move(rec.raw_features)});
  }
  AttackResult r;
  r.gallery_size = static_cast<int>(gallery.actors.size());
  r.probes = probe_scenes;
  r.chance = 1.0 / r.gallery_size;
  r.tuples = attack_detail::score(gallery, probes, false);
  r.control = attack_detail::score(gallery, probes, true);
  return r;
}

}  // namespace pcv::audit
