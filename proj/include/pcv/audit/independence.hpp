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
#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

#include "pcv/core/error.hpp"
#include "pcv/core/image.hpp"
#include "pcv/edge/background.hpp"

namespace pcv::audit {

struct IndependenceResult {
  int trials = 0;
  int failures = 0;
  std::vector<int> failed_trials;  // first few failing trial indices
  double min_coverage = 1;
  double max_coverage = 0;

  bool passed() const { return failures == 0; }
};

struct IndependenceConfig {
  Size size{320, 240};
  double min_coverage = 0.01;
  double max_coverage = 0.60;
};

namespace independence_detail {

// Bulk bit source for per-pixel draws, seeded from the trial generator.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t operator()() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

inline void fill_random(std::span<std::uint8_t> bytes, SplitMix64& rng) {
  std::uint8_t* p = bytes.data();
  const std::size_t n = bytes.size();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const std::uint64_t w = rng();
    std::memcpy(p + i, &w, 8);
  }
  for (std::uint64_t w = rng(); i < n; ++i, w >>= 8) p[i] = static_cast<std::uint8_t>(w);
}

// Rectangles and elliptical blobs until the target coverage is reached.
inline Bitmap random_mask(Size size, double target, std::mt19937_64& rng) {
  Bitmap m(size);
  const std::size_t want = static_cast<std::size_t>(std::ceil(target * size.area()));
  std::size_t have = 0;
  std::uniform_int_distribution<int> coin(0, 1);
  while (have < want) {
    const double budget = std::max(16.0, double(want - have));
    const double side = std::sqrt(budget) * std::uniform_real_distribution<double>(0.3, 1.2)(rng);
    const double aspect = std::uniform_real_distribution<double>(0.4, 2.5)(rng);
    const int w = std::clamp(int(side * std::sqrt(aspect)), 1, size.width);
    const int h = std::clamp(int(side / std::sqrt(aspect)), 1, size.height);
    const int x0 = std::uniform_int_distribution<int>(0, size.width - w)(rng);
    const int y0 = std::uniform_int_distribution<int>(0, size.height - h)(rng);
    const bool blob = coin(rng);
    const double cx = x0 + w / 2.0, cy = y0 + h / 2.0;
    for (int y = y0; y < y0 + h && have < want; ++y)
      for (int x = x0; x < x0 + w && have < want; ++x) {
        if (blob) {
          const double dx = (x + 0.5 - cx) / (w / 2.0), dy = (y + 0.5 - cy) / (h / 2.0);
          if (dx * dx + dy * dy > 1) continue;
        }
        if (!m.get(x, y)) {
          m.set(x, y);
          ++have;
        }
      }
  }
  return m;
}

inline edge::BackgroundModel random_model(Size size, std::mt19937_64& gen) {
  edge::BackgroundModel model(size);
  const std::uint64_t seen_below = gen();
  SplitMix64 rng{gen()};
  constexpr std::uint32_t kMax = 255u << edge::BackgroundModel::kFracBits;
  for (int y = 0; y < size.height; ++y)
    for (int x = 0; x < size.width; ++x) {
      if (rng() >= seen_below) continue;
      model.seen().set(x, y);
      const std::uint64_t a = rng(), b = rng();
      auto scale = [](std::uint64_t w) { return static_cast<std::uint32_t>(((w & 0xFFFFFFFFu) * (kMax + 1ull)) >> 32); };
      model.set_accum(x, y, 0, scale(a));
      model.set_accum(x, y, 1, scale(a >> 32));
      model.set_accum(x, y, 2, scale(b));
    }
  return model;
}

}  // namespace independence_detail

// Checks that `erase_fn(frame, mask, model)` ignores masked pixels: each trial
// re-randomizes the masked pixels of a random frame and requires identical
// output bytes. Deterministic in `seed`.
template <typename EraseFn>
IndependenceResult mask_independence_audit(int trials, std::uint64_t seed, EraseFn&& erase_fn,
                                           const IndependenceConfig& cfg = {}) {
  using namespace independence_detail;
  require(trials >= 1, ErrorKind::kPrecondition, "mask_independence_audit: trials must be >= 1");
  require(cfg.size.width > 0 && cfg.size.height > 0, ErrorKind::kValidation, "audit frame size must be positive");
  require(0 < cfg.min_coverage && cfg.min_coverage <= cfg.max_coverage && cfg.max_coverage <= 1,
          ErrorKind::kValidation, "audit coverage range invalid");
  IndependenceResult r;
  r.trials = trials;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coverage(cfg.min_coverage, cfg.max_coverage);
  for (int t = 0; t < trials; ++t) {
    SplitMix64 bits{rng()};
    Frame f(cfg.size);
    fill_random(f.bytes(), bits);
    const Bitmap mask = random_mask(cfg.size, coverage(rng), rng);
    const edge::BackgroundModel model = random_model(cfg.size, rng);

    Frame g = f;
    for (int y = 0; y < cfg.size.height; ++y)
      for (int x = 0; x < cfg.size.width; ++x) {
        if (!mask.get(x, y)) continue;
        // Force every masked pixel to change.
        const std::uint64_t w = bits() | 1;
        std::uint8_t* p = g.px(x, y);
        p[0] ^= static_cast<std::uint8_t>(w);
        p[1] ^= static_cast<std::uint8_t>(w >> 8);
        p[2] ^= static_cast<std::uint8_t>(w >> 16);
      }

    const double cov = double(mask.count()) / cfg.size.area();
    r.min_coverage = std::min(r.min_coverage, cov);
    r.max_coverage = std::max(r.max_coverage, cov);
    const auto a = erase_fn(f, mask, model);
    const auto b = erase_fn(g, mask, model);
    if (!(a.image == b.image)) {
      ++r.failures;
      if (r.failed_trials.size() < 16) r.failed_trials.push_back(t);
    }
  }
  return r;
}

inline IndependenceResult mask_independence_audit(int trials, std::uint64_t seed, const IndependenceConfig& cfg = {}) {
  return mask_independence_audit(
      trials, seed, [](const Frame& f, const Bitmap& m, const edge::BackgroundModel& b) { return edge::erase(f, m, b); },
      cfg);
}

}  // namespace pcv::audit
