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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Run with a criterion number to run just that one.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pcv/app/calibrate.hpp"
#include "pcv/app/commands.hpp"
#include "pcv/audit/attack.hpp"
#include "pcv/audit/independence.hpp"
#include "pcv/edge/compose.hpp"
#include "pcv/sim/scenarios.hpp"
#include "test_support.hpp"

namespace {

using namespace pcv;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pcv_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// 1. Erasure independence.
Outcome erasure_independence() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = audit::mask_independence_audit(10000, 20260101);
  const double s = seconds_since(t0);
  return {r.failures == 0 && s < 60,
          fmt("%d trials, %d failures, coverage %.3f..%.3f, %.1f s (limit 60 s)", r.trials, r.failures,
              r.min_coverage, r.max_coverage, s)};
}

// 2. Wire round trip and corruption detection.
Outcome wire_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260102);
  std::uniform_int_distribution<int> dim(1, 64);
  int exact = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto t = testing::random_tuple(rng, {dim(rng), dim(rng)});
    exact += transport::decode(transport::encode(t)) == t;
  }

  // Reference packet: a real three-actor frame.
  const auto spec = sim::three_actor_scene(41);
  sim::SceneRenderer renderer(spec);
  edge::EdgeState state({spec.width, spec.height}, {});
  transport::Bytes ref;
  for (int t = 0; t < spec.frame_count; ++t) {
    auto [frame, gt] = renderer.render(t);
    const auto out = edge::process_frame(frame, state, &gt);
    if (t == spec.frame_count - 1) ref = transport::encode(app::make_tuple(out, app::sync_key(0, t, 30)));
  }
  long long variants = 0, detected = 0;
  transport::Bytes bad = ref;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (int v = 0; v < 256; ++v) {
      if (v == ref[i]) continue;
      bad[i] = static_cast<std::uint8_t>(v);
      ++variants;
      try {
        transport::decode(bad);
      } catch (const Error&) {
        ++detected;
      }
    }
    bad[i] = ref[i];
  }
  const double s = seconds_since(t0);
  return {exact == 1000 && detected == variants && s < 30,
          fmt("%d/1000 exact round trips; %lld/%lld corruptions of a %zu-byte packet detected; %.1f s (limit 30 s)",
              exact, detected, variants, ref.size(), s)};
}

// 3. Identity attack at chance.
Outcome identity_attack() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = 20260103;
  const auto gallery = audit::build_gallery(sim::distinct_appearances(8, seed), seed + 1);
  const auto r = audit::identity_attack(gallery, 400, seed + 2);
  const double s = seconds_since(t0);
  return {r.tuples.accuracy <= 0.175 && r.control.accuracy >= 0.95 && s < 300,
          fmt("tuple attack %.4f (best channel %s, 95%% CI %.3f..%.3f) <= 0.175; raw control %.4f >= 0.95; %.1f s "
              "(limit 300 s)",
              r.tuples.accuracy, std::string(audit::to_string(r.tuples.best)).c_str(), r.tuples.ci_low,
              r.tuples.ci_high, r.control.accuracy, s)};
}

// 4. Cloud reconstruction equals the edge composite.
Outcome render_equivalence() {
  const auto spec = sim::three_actor_scene(300);
  const Size size{spec.width, spec.height};
  sim::SceneRenderer renderer(spec);
  edge::EdgeState state(size, {});
  transport::PacketQueue queue;
  cloud::CloudSession session;
  int equal = 0, frames = 0, with_subjects = 0;
  for (int t = 0; t < spec.frame_count; ++t) {
    auto [frame, gt] = renderer.render(t);
    const auto out = edge::process_frame(frame, state, &gt);
    queue.send(transport::encode(app::make_tuple(out, app::sync_key(0, t, 30))));
    const auto tuple = transport::decode(*queue.next());
    const auto cf = cloud::process_tuple(session, tuple);
    ++frames;
    with_subjects += !out.poses.empty();
    const auto a = cf.scene.raster.bytes();
    const auto b = out.composite.image.bytes();
    equal += cf.scene.raster.size() == out.composite.image.size() && std::equal(a.begin(), a.end(), b.begin(), b.end());
  }
  return {equal == frames && frames == 300,
          fmt("%d/%d frames byte-identical (%d with subjects)", equal, frames, with_subjects)};
}

// 5. Behaviour recognition with calibrated, then frozen, thresholds.
Outcome behavior_utility() {
  const auto calib_suite = app::record_suite(5000);
  const auto cal = app::calibrate_fall_thresholds(calib_suite);
  const auto test_suite = app::record_suite(1000);
  const auto s = app::evaluate_suite(test_suite, cal.config);
  return {s.all.fall_recall >= 0.95 && s.sit.false_fall_rate <= 0.05,
          fmt("calibrated falling_vy %.2f fallen_spine %.0f deg on 20 scenes (recall %.3f, false falls %.3f); held-out 20 scenes: fall recall %.4f "
              "(%d/%d) >= 0.95, sit-scene false falls %.4f (%d/%d) <= 0.05, accuracy %.3f",
              cal.config.falling_vy, cal.config.fallen_spine_deg, cal.scores.all.fall_recall,
              cal.scores.sit.false_fall_rate, s.all.fall_recall, s.all.fall_hits,
              s.all.fall_frames, s.sit.false_fall_rate, s.sit.false_falls, s.sit.non_fall_frames, s.all.accuracy)};
}

// 6. Tracking stability through a crossing.
Outcome tracking_stability() {
  const auto spec = sim::crossing_scene();
  const Size size{spec.width, spec.height};
  sim::SceneRenderer renderer(spec);
  edge::EdgeState state(size, {});
  std::map<int, SubjectId> id_of;
  int switches = 0, bad_orders = 0;
  for (int t = 0; t < spec.frame_count; ++t) {
    auto [frame, gt] = renderer.render(t);
    const auto out = edge::process_frame(frame, state, &gt);
    std::vector<SubjectId> ids;
    for (const auto& p : out.poses) ids.push_back(p.subject_id);
    bad_orders += !edge::is_permutation_of(out.order, ids);
    for (const auto& [subject, actor] : app::subject_actors(out, gt, size)) {
      auto [it, fresh] = id_of.emplace(actor, subject);
      if (!fresh && it->second != subject) {
        ++switches;
        it->second = subject;
      }
    }
  }
  return {switches == 0 && bad_orders == 0 && id_of.size() == 2,
          fmt("%d identity switches over %d frames, %zu actors tracked, %d invalid occlusion orders", switches,
              spec.frame_count, id_of.size(), bad_orders)};
}

// 7. Reorder and gap handling on file replays.
Outcome reorder_and_gaps() {
  const fs::path dir = scratch_dir("reorder");
  app::RunConfig cfg;
  cfg.scenario = "walk_fall";
  cfg.seed = 7;
  cfg.out_dir = dir / "edge";
  cfg.transport.kind = app::TransportKind::kFile;
  app::cmd_edge_run(cfg);
  const auto packets = transport::read_records(cfg.out_dir / "packets.bin");

  auto replay = [&](const std::string& name, const std::vector<transport::Bytes>& stream) {
    transport::write_records(dir / (name + ".bin"), stream);
    app::RunConfig c = cfg;
    c.out_dir = dir / name;
    c.transport.path = (dir / (name + ".bin")).string();
    return app::cmd_cloud_run(c);
  };

  const auto in_order = replay("in_order", packets);

  // Displace every packet by less than the buffer capacity and the gap window.
  std::vector<transport::Bytes> shuffled = packets;
  std::mt19937_64 rng(20260107);
  const std::size_t block = std::min<std::size_t>(cfg.reorder.capacity, cfg.reorder.gap_frames) / 2;
  for (std::size_t i = 0; i < shuffled.size(); i += block)
    std::shuffle(shuffled.begin() + i, shuffled.begin() + std::min(i + block, shuffled.size()), rng);
  const auto reordered = replay("shuffled", shuffled);

  std::vector<transport::Bytes> missing = packets;
  missing.erase(missing.begin() + 2);
  const auto gapped = replay("missing", missing);
  const auto gaps = gapped.count(transport::DeliveryEventKind::kGap);
  const bool gap_ok = gaps == 1 && gapped.events.size() == 1 && gapped.events[0].frame_id == 2;

  const bool same = reordered.report_lines == in_order.report_lines &&
                    slurp(dir / "shuffled" / "reports.jsonl") == slurp(dir / "in_order" / "reports.jsonl");
  fs::remove_all(dir);
  return {same && in_order.reports == static_cast<int>(packets.size()) && gap_ok,
          fmt("%zu packets; shuffled replay (blocks of %zu) reports %s in-order; frame 2 deleted -> %d gap event(s), "
              "%zu event(s) total",
              packets.size(), block, same ? "identical to" : "DIFFER from", gaps, gapped.events.size())};
}

// 8. End-to-end determinism and runtime.
Outcome e2e_determinism() {
  const fs::path dir = scratch_dir("e2e");
  double worst = 0;
  std::vector<std::vector<std::string>> files;
  for (int run = 0; run < 2; ++run) {
    app::RunConfig cfg;
    cfg.out_dir = dir / ("run" + std::to_string(run));
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = app::cmd_e2e(cfg);
    worst = std::max(worst, seconds_since(t0));
    files.push_back(r.files);
  }
  int compared = 0, differing = 0;
  for (const auto& f : files[0]) {
    // Logs and timing carry wall-clock values.
    if (f.ends_with("_log.jsonl") || f == "timing.json") continue;
    ++compared;
    differing += slurp(dir / "run0" / f) != slurp(dir / "run1" / f);
  }
  const bool same_set = files[0] == files[1];
  fs::remove_all(dir);
  return {same_set && differing == 0 && compared > 300 && worst < 60,
          fmt("%d output files compared, %d differ%s; slowest run %.1f s (limit 60 s)", compared, differing,
              same_set ? "" : ", file sets differ", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"erasure independence", erasure_independence},
      {"wire round trip", wire_round_trip},
      {"identity attack at chance", identity_attack},
      {"edge/cloud render equivalence", render_equivalence},
      {"behavior recognition", behavior_utility},
      {"tracking stability", tracking_stability},
      {"reorder and gap handling", reorder_and_gaps},
      {"e2e determinism and runtime", e2e_determinism},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (only != 0 && only != n) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", n, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(fs::temp_directory_path() / ("pcv_acceptance_" + std::to_string(::getpid())));
  return failed == 0 ? 0 : 1;
}
