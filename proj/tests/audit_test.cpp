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

#include <gtest/gtest.h>

#include <random>

#include "pcv/app/link.hpp"
#include "pcv/audit/attack.hpp"
#include "pcv/audit/independence.hpp"
#include "pcv/audit/leak.hpp"
#include "pcv/audit/report.hpp"
#include "pcv/sim/scenarios.hpp"
#include "test_support.hpp"

namespace pcv {
namespace {

using audit::IndependenceConfig;

const IndependenceConfig kSmall{{64, 48}};

TEST(IndependenceAudit, ShippedEraseNeverFails) {
  const auto r = audit::mask_independence_audit(300, 7, kSmall);
  EXPECT_EQ(r.trials, 300);
  EXPECT_EQ(r.failures, 0);
  EXPECT_TRUE(r.passed());
  EXPECT_GE(r.min_coverage, 0.01);
  EXPECT_LE(r.max_coverage, 0.60 + 1.0 / kSmall.size.area());
}

TEST(IndependenceAudit, DeterministicInSeed) {
  const auto a = audit::mask_independence_audit(40, 99, kSmall);
  const auto b = audit::mask_independence_audit(40, 99, kSmall);
  const auto c = audit::mask_independence_audit(40, 100, kSmall);
  EXPECT_EQ(a.min_coverage, b.min_coverage);
  EXPECT_EQ(a.max_coverage, b.max_coverage);
  EXPECT_NE(a.min_coverage, c.min_coverage);
}

TEST(IndependenceAudit, CatchesEraseThatCopiesOneMaskedPixel) {
  auto broken = [](const Frame& f, const Bitmap& m, const edge::BackgroundModel& b) {
    auto out = edge::erase(f, m, b);
    for (int y = 0; y < f.height(); ++y)
      for (int x = 0; x < f.width(); ++x)
        if (m.get(x, y)) {
          out.image.set(x, y, f.at(x, y));
          return out;
        }
    return out;
  };
  const auto r = audit::mask_independence_audit(50, 3, broken, kSmall);
  EXPECT_GE(r.failures, 1);
  EXPECT_EQ(r.failures, 50);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.failed_trials.front(), 0);
}

TEST(IndependenceAudit, CatchesEraseThatReadsMaskedNeighbourhood) {
  // Leaks the low bit of each masked input pixel.
  auto leaky = [](const Frame& f, const Bitmap& m, const edge::BackgroundModel& b) {
    auto out = edge::erase(f, m, b);
    for (int y = 0; y < f.height(); ++y)
      for (int x = 0; x < f.width(); ++x)
        if (m.get(x, y)) out.image.px(x, y)[0] = static_cast<std::uint8_t>(out.image.px(x, y)[0] ^ (f.px(x, y)[0] & 1));
    return out;
  };
  EXPECT_EQ(audit::mask_independence_audit(20, 5, leaky, kSmall).failures, 20);
}

TEST(IndependenceAudit, ZeroTrialsRejected) {
  try {
    audit::mask_independence_audit(0, 1, kSmall);
    FAIL() << "expected precondition error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPrecondition);
  }
}

// -- Leak scan --------------------------------------------------------------

RgbImage ramp_image(Size s) {
  RgbImage img(s);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      img.set(x, y, {static_cast<std::uint8_t>(x * 7 % 256), static_cast<std::uint8_t>(y * 5 % 256),
                     static_cast<std::uint8_t>((x + y) * 3 % 256)});
  return img;
}

TEST(LeakScan, ExactCopyScoresOne) {
  const Size s{24, 20};
  const RgbImage raw = ramp_image(s);
  const Bitmap mask(s, true);
  const auto r = audit::pixel_leak_scan(raw, raw, mask);
  EXPECT_NEAR(r.peak, 1.0, 1e-12);
  EXPECT_EQ(r.patches, (24 - 7) * (20 - 7));
  EXPECT_FALSE(r.passed());
}

TEST(LeakScan, AffineCopyStillScoresOne) {
  const Size s{16, 16};
  const RgbImage raw = ramp_image(Size{16, 16});
  RgbImage env(s);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      const Rgb c = raw.at(x, y);
      env.set(x, y, {static_cast<std::uint8_t>(c.r / 2 + 10), static_cast<std::uint8_t>(c.g / 2 + 40),
                     static_cast<std::uint8_t>(c.b / 2 + 3)});
    }
  Bitmap mask(s);
  for (int y = 4; y < 12; ++y)
    for (int x = 4; x < 12; ++x) mask.set(x, y);
  const auto r = audit::pixel_leak_scan(env, raw, mask);
  EXPECT_EQ(r.patches, 1);
  EXPECT_EQ(r.x, 4);
  EXPECT_EQ(r.y, 4);
  EXPECT_GT(r.peak, 0.99);
}

TEST(LeakScan, MidGrayFillScoresZero) {
  std::mt19937_64 rng(4);
  const Size s{40, 30};
  const RgbImage raw = testing::random_rgb_image(s, rng);
  RgbImage env(s);
  env.fill(kNeverSeenFill);
  const auto r = audit::pixel_leak_scan(env, raw, Bitmap(s, true));
  EXPECT_GT(r.patches, 0);
  EXPECT_EQ(r.peak, 0.0);
  EXPECT_TRUE(r.passed());
}

TEST(LeakScan, UnmaskedPatchesExcluded) {
  const Size s{32, 32};
  const RgbImage raw = ramp_image(s);
  Bitmap mask(s);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 32; ++x) mask.set(x, y);  // no 8x8 window fits
  const auto r = audit::pixel_leak_scan(raw, raw, mask);
  EXPECT_EQ(r.patches, 0);
  EXPECT_EQ(r.peak, 0.0);
}

TEST(LeakScan, NccOracle) {
  // Channel r is a step edge, g and b are flat: centred products only come
  // from r. env r = 255 - raw r gives -1; a shifted step gives a frozen value.
  const Size s{8, 8};
  RgbImage raw(s), inv(s), shifted(s);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      raw.set(x, y, {static_cast<std::uint8_t>(x < 4 ? 50 : 150), 9, 9});
      inv.set(x, y, {static_cast<std::uint8_t>(x < 4 ? 205 : 105), 77, 77});
      shifted.set(x, y, {static_cast<std::uint8_t>(x < 2 ? 50 : 150), 1, 2});
    }
  EXPECT_NEAR(audit::patch_ncc(inv, raw, 0, 0), -1.0, 1e-12);
  // Frozen from numpy.corrcoef of the two r-channel steps.
  EXPECT_NEAR(audit::patch_ncc(shifted, raw, 0, 0), 0.5773502691896258, 1e-12);
}

TEST(LeakScan, DimensionMismatch) {
  try {
    audit::pixel_leak_scan(RgbImage(8, 8), Frame(9, 8), Bitmap(8, 8));
    FAIL() << "expected validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
  }
}

TEST(LeakScan, OracleSingleActorScenesStayBelowThreshold) {
  for (auto kind : {sim::ScriptKind::kFall, sim::ScriptKind::kSit, sim::ScriptKind::kStandWalkStand}) {
    const auto spec = sim::behavior_scene(kind, 5, 60);
    const auto scene = sim::generate_scene(spec);
    edge::EdgeState state({spec.width, spec.height}, {});
    int scanned = 0;
    for (int t = 0; t < spec.frame_count; ++t) {
      const auto out = edge::process_frame(scene.frames[t], state, &scene.ground_truth[t]);
      const auto tuple = app::make_tuple(out, app::sync_key(0, t, 30));
      const auto r = audit::pixel_leak_scan(tuple, scene.frames[t], scene.ground_truth[t].actors[0].mask);
      scanned += r.patches;
      EXPECT_LT(r.peak, 0.9) << to_string(kind) << " frame " << t;
    }
    EXPECT_GT(scanned, 1000);
  }
}

// -- Identity attack --------------------------------------------------------

TEST(AttackStats, WilsonInterval) {
  // Frozen from statsmodels proportion_confint(method="wilson").
  auto [lo, hi] = audit::wilson_interval(50, 400);
  EXPECT_NEAR(lo, 0.0961151232367638, 1e-12);
  EXPECT_NEAR(hi, 0.1610190975139586, 1e-12);
  std::tie(lo, hi) = audit::wilson_interval(0, 10);
  EXPECT_NEAR(lo, 0.0, 1e-12);
  EXPECT_NEAR(hi, 0.27753279986288926, 1e-12);
}

TEST(IdentityAttack, DuplicateAppearancesRejected) {
  const auto looks = sim::distinct_appearances(3, 1);
  try {
    audit::build_gallery({looks[0], looks[1], looks[0]}, 1);
    FAIL() << "expected validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
  }
  audit::AttackGallery g;
  g.actors = {{"a", looks[0], {audit::EnrollmentRecord{}}}, {"b", looks[0], {audit::EnrollmentRecord{}}}};
  EXPECT_THROW(audit::identity_attack(g, 1, 1), Error);
}

TEST(IdentityAttack, SingleActorGalleryRejected) {
  try {
    audit::build_gallery(sim::distinct_appearances(1, 1), 1);
    FAIL() << "expected validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
  }
}

audit::AttackConfig small_attack() {
  audit::AttackConfig cfg;
  cfg.frames_per_scene = 4;
  cfg.enrollment_scenes = 2;
  return cfg;
}

TEST(IdentityAttack, TwoWayGalleryHasChanceOneHalf) {
  const auto cfg = small_attack();
  const auto g = audit::build_gallery(sim::distinct_appearances(2, 2), 3, cfg);
  const auto r = audit::identity_attack(g, 12, 4, cfg);
  EXPECT_EQ(r.gallery_size, 2);
  EXPECT_EQ(r.probes, 12);
  EXPECT_DOUBLE_EQ(r.chance, 0.5);
  EXPECT_GE(r.control.accuracy, 0.95);
  for (const auto& c : r.tuples.channels) {
    EXPECT_GE(c.accuracy, 0.0);
    EXPECT_LE(c.accuracy, 1.0);
  }
}

TEST(IdentityAttack, RawControlIdentifiesAndTuplesDoNot) {
  const auto cfg = small_attack();
  const auto g = audit::build_gallery(sim::distinct_appearances(6, 8), 9, cfg);
  const auto r = audit::identity_attack(g, 60, 10, cfg);
  EXPECT_TRUE(r.valid());
  EXPECT_EQ(r.control.best, audit::AttackChannel::kEnvStats);
  EXPECT_DOUBLE_EQ(r.control.accuracy, 1.0);
  // 60 probes over 6 actors: chance 1/6, so a loose bound still separates a
  // working attack from a blind one.
  EXPECT_LE(r.tuples.accuracy, 0.40);
  EXPECT_LE(r.tuples.ci_low, r.tuples.accuracy);
  EXPECT_GE(r.tuples.ci_high, r.tuples.accuracy);
  EXPECT_EQ(r.tuples.channels.size(), 4u);
}

TEST(IdentityAttack, DeterministicInSeed) {
  const auto cfg = small_attack();
  const auto g = audit::build_gallery(sim::distinct_appearances(3, 4), 5, cfg);
  const auto a = audit::identity_attack(g, 9, 6, cfg);
  const auto b = audit::identity_attack(g, 9, 6, cfg);
  for (int c = 0; c < 4; ++c) {
    EXPECT_EQ(a.tuples.channels[c].correct, b.tuples.channels[c].correct);
    EXPECT_EQ(a.control.channels[c].correct, b.control.channels[c].correct);
  }
}

TEST(IdentityAttack, EnrollmentKeepsTuplesOnRequest) {
  const auto cfg = small_attack();
  const auto g = audit::build_gallery(sim::distinct_appearances(2, 4), 5, cfg, true);
  ASSERT_EQ(g.actors[0].enrollment.size(), 2u);
  EXPECT_EQ(g.actors[0].enrollment[0].tuples.size(), 4u);
  EXPECT_EQ(g.actors[0].enrollment[0].features.embedding.size(), 64u);
}

// -- Report ------------------------------------------------------------------

TEST(AuditReport, JsonShapeAndVerdict) {
  audit::AuditReport rep;
  rep.independence = audit::mask_independence_audit(5, 1, kSmall);
  rep.leak_scan.push_back({3, {0.42, 1, 2, 10}});
  auto j = audit::to_json(rep);
  EXPECT_EQ(j["independence"]["failures"], 0);
  EXPECT_EQ(j["leak_scan"]["frames"][0]["frame_id"], 3);
  EXPECT_DOUBLE_EQ(j["leak_scan"]["peak"].get<double>(), 0.42);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_FALSE(j.contains("identity_attack"));

  rep.leak_scan.push_back({4, {0.95, 0, 0, 1}});
  EXPECT_FALSE(rep.passed());
  EXPECT_FALSE(audit::to_json(rep)["leak_scan"]["passed"].get<bool>());
}

TEST(AuditReport, InvalidControlFailsTheAttackSection) {
  audit::AttackResult r;
  r.gallery_size = 8;
  r.probes = 100;
  r.chance = 0.125;
  r.tuples.accuracy = 0.12;
  r.control.accuracy = 0.80;
  EXPECT_FALSE(r.valid());
  EXPECT_FALSE(r.passed());
  r.control.accuracy = 0.97;
  EXPECT_TRUE(r.passed());
  r.tuples.accuracy = 0.18;
  EXPECT_FALSE(r.passed());
}

}  // namespace
}  // namespace pcv
