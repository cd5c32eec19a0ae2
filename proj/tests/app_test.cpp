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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "pcv/app/calibrate.hpp"
#include "pcv/app/commands.hpp"
#include "pcv/app/config.hpp"
#include "pcv/app/metrics.hpp"
#include "pcv/sim/scenarios.hpp"

namespace pcv::app {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path p = fs::temp_directory_path() / "pcv_app_test" / (std::string(info->name()) + "_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int count_lines(const fs::path& p) {
  std::ifstream is(p);
  int n = 0;
  for (std::string line; std::getline(is, line);) n += !line.empty();
  return n;
}

RunConfig small_config(const fs::path& out, int frames = 10) {
  RunConfig c;
  c.scene = sim::three_actor_scene(frames);
  c.out_dir = out;
  c.transport.kind = TransportKind::kFile;
  return c;
}

// ----------------------------------------------------------------- config

TEST(Config, DefaultsValidate) {
  const RunConfig c;
  EXPECT_NO_THROW(validate(c));
  EXPECT_EQ(c.classifier.falling_vy, 0.08);
  EXPECT_EQ(c.reorder.capacity, 64u);
  EXPECT_EQ(c.audit.independence_trials, 10000);
}

TEST(Config, ParsesNestedSections) {
  const auto c = config_from_json(json::parse(R"({
    "scenario": "crossing", "mode": "heuristic", "seed": 9, "fps": 25,
    "classifier": {"falling_vy": 0.1},
    "reorder": {"capacity": 8, "gap_frames": 4, "gap_timeout_ms": 500},
    "transport": {"kind": "socket", "address": "127.0.0.1:9000"},
    "debug": {"inject_gate_violation_at": 3}
  })"));
  EXPECT_EQ(c.scenario, "crossing");
  EXPECT_EQ(c.edge.mode, PerceptionMode::kHeuristic);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.edge.seed, 9u);
  EXPECT_EQ(c.fps, 25);
  EXPECT_EQ(c.classifier.falling_vy, 0.1);
  EXPECT_EQ(c.reorder.capacity, 8u);
  EXPECT_EQ(c.reorder.gap_timeout.count(), 500);
  EXPECT_EQ(c.transport.kind, TransportKind::kSocket);
  EXPECT_EQ(c.inject_gate_violation_at, 3);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  auto kind = [](const char* text) {
    try {
      config_from_json(json::parse(text));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kPrecondition;
  };
  EXPECT_NE(kind(R"({"sedd": 1})"), ErrorKind::kPrecondition);
  EXPECT_NE(kind(R"({"classifier": {"falling": 0.1}})"), ErrorKind::kPrecondition);
  EXPECT_NE(kind(R"({"scenario": "nope"})"), ErrorKind::kPrecondition);
  EXPECT_NE(kind(R"({"fps": 0})"), ErrorKind::kPrecondition);
  EXPECT_NE(kind(R"({"mode": "magic"})"), ErrorKind::kPrecondition);
  EXPECT_NE(kind(R"({"transport": {"kind": "socket", "address": "nohost"}})"), ErrorKind::kPrecondition);
}

TEST(Config, RoundTripsThroughJson) {
  RunConfig c;
  c.scenario = "fall";
  c.seed = 4;
  c.classifier.fallen_spine_deg = 55;
  const json j = config_to_json(c);
  const RunConfig back = config_from_json(j);
  EXPECT_EQ(config_to_json(back), j);
}

TEST(Config, LoadsSceneFileRelativeToConfig) {
  const fs::path dir = fresh_dir("cfg");
  fs::create_directories(dir);
  write_json(dir / "scene.json", sim::scene_to_json(sim::crossing_scene(5)));
  write_text(dir / "run.json", R"({"scene": "scene.json"})");
  const auto c = load_config(dir / "run.json");
  EXPECT_EQ(resolve_scene(c).frame_count, 5);
  EXPECT_THROW(load_config(dir / "missing.json"), Error);
}

TEST(Config, EmptyScenarioHasNoActors) {
  RunConfig c;
  c.scenario = "empty";
  const auto spec = resolve_scene(c);
  EXPECT_TRUE(spec.actors.empty());
  EXPECT_GT(spec.frame_count, 0);
}

// ----------------------------------------------------------------- metrics

TEST(Metrics, BothFallLabelsMatchAFall) {
  using cloud::BehaviorLabel;
  EXPECT_TRUE(label_matches(sim::Action::kFall, BehaviorLabel::kFalling));
  EXPECT_TRUE(label_matches(sim::Action::kFall, BehaviorLabel::kFallen));
  EXPECT_FALSE(label_matches(sim::Action::kFall, BehaviorLabel::kSitting));
  EXPECT_TRUE(label_matches(sim::Action::kSit, BehaviorLabel::kSitting));
  EXPECT_FALSE(label_matches(sim::Action::kStand, BehaviorLabel::kUnknown));
}

TEST(Metrics, ToleranceBandOnlyAffectsFallRates) {
  using cloud::BehaviorLabel;
  std::vector<LabelRecord> r = {
      {0, "a", sim::Action::kStand, BehaviorLabel::kStanding, 20},
      {1, "a", sim::Action::kStand, BehaviorLabel::kFalling, 5},   // inside the band
      {2, "a", sim::Action::kFall, BehaviorLabel::kStanding, 4},   // inside the band
      {3, "a", sim::Action::kFall, BehaviorLabel::kFallen, 6},
      {4, "a", sim::Action::kSit, BehaviorLabel::kFalling, 30},
  };
  const auto s = score_labels(r);
  EXPECT_EQ(s.scored, 5);
  EXPECT_EQ(s.correct, 2);
  EXPECT_EQ(s.fall_frames, 1);
  EXPECT_EQ(s.fall_hits, 1);
  EXPECT_EQ(s.non_fall_frames, 2);
  EXPECT_EQ(s.false_falls, 1);
  EXPECT_DOUBLE_EQ(s.false_fall_rate, 0.5);
}

TEST(Metrics, EmptyRecordsScoreOne) {
  const auto s = score_labels({});
  EXPECT_EQ(s.accuracy, 1.0);
  EXPECT_EQ(s.fall_recall, 1.0);
  EXPECT_EQ(s.false_fall_rate, 0.0);
}

TEST(Metrics, DistanceToTransition) {
  const auto spec = sim::behavior_scene(sim::ScriptKind::kWalkThenFall, 3);
  const auto& a = spec.actors.front();
  ASSERT_GE(a.script.size(), 2u);
  const int boundary = a.script[1].begin;
  EXPECT_EQ(distance_to_transition(a, boundary), 0);
  EXPECT_EQ(distance_to_transition(a, boundary - 3), 3);
  const auto stand = sim::behavior_scene(sim::ScriptKind::kStandOnly, 3);
  EXPECT_GT(distance_to_transition(stand.actors.front(), 10), 1000);
}

TEST(Calibration, GridSearchFindsAFeasiblePoint) {
  const auto suite = record_suite(5000, 5);
  const auto cal = calibrate_fall_thresholds(suite);
  EXPECT_EQ(cal.grid_points, 25);
  EXPECT_TRUE(cal.feasible);
  EXPECT_GE(cal.scores.all.fall_recall, 0.95);
}

// ---------------------------------------------------------------- commands

TEST(Commands, SimWritesFramesAndGroundTruth) {
  const fs::path out = fresh_dir("sim");
  const auto r = cmd_sim_generate(small_config(out, 6));
  EXPECT_EQ(r.frames, 6);
  EXPECT_EQ(count_lines(out / "gt.jsonl"), 6);
  EXPECT_TRUE(fs::exists(out / "frames" / "cam0_frame000005.png"));
  const auto gt0 = json::parse(slurp(out / "gt.jsonl").substr(0, slurp(out / "gt.jsonl").find('\n')));
  EXPECT_EQ(gt0.at("frame"), 0);
  EXPECT_EQ(gt0.at("actors").size(), 3u);
}

TEST(Commands, UnwritableOutputIsAnIoError) {
  RunConfig c = small_config("/proc/pcv_not_here");
  try {
    cmd_sim_generate(c);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
    EXPECT_EQ(exit_code_for(e), kExitIo);
  }
}

TEST(Commands, TenFrameSceneGivesTenPackets) {
  const fs::path out = fresh_dir("edge");
  const auto r = cmd_edge_run(small_config(out));
  EXPECT_EQ(r.frames, 10);
  EXPECT_EQ(r.packets, 10);
  EXPECT_EQ(transport::read_records(out / "packets.bin").size(), 10u);
  EXPECT_EQ(count_lines(out / "edge_log.jsonl"), 10);
  const auto line = json::parse(slurp(out / "edge_log.jsonl").substr(0, slurp(out / "edge_log.jsonl").find('\n')));
  for (const char* k : {"event", "frame_id", "edge_ms", "wall_time_us"}) EXPECT_TRUE(line.contains(k)) << k;
}

TEST(Commands, EdgeRerunIsByteIdentical) {
  const fs::path a = fresh_dir("a"), b = fresh_dir("b");
  cmd_edge_run(small_config(a));
  cmd_edge_run(small_config(b));
  EXPECT_EQ(slurp(a / "packets.bin"), slurp(b / "packets.bin"));
}

TEST(Commands, GateViolationStopsTheStream) {
  const fs::path out = fresh_dir("gate");
  RunConfig c = small_config(out);
  c.inject_gate_violation_at = 4;
  try {
    cmd_edge_run(c);
    FAIL() << "expected a gate abort";
  } catch (const GateAbort& g) {
    EXPECT_EQ(g.frame_id(), 4u);
    EXPECT_TRUE(g.report().has("reserved-bits"));
    EXPECT_EQ(exit_code_for(g), kExitGate);
  }
  EXPECT_EQ(transport::read_records(out / "packets.bin").size(), 4u);
  const auto summary = json::parse(slurp(out / "edge_summary.json"));
  EXPECT_EQ(summary.at("gate_violation").at("frame_id"), 4);
}

TEST(Commands, CloudReplayCountsAndSkipsMalformedPackets) {
  const fs::path dir = fresh_dir("cloud");
  RunConfig c = small_config(dir / "edge");
  cmd_edge_run(c);
  auto packets = transport::read_records(dir / "edge" / "packets.bin");
  packets[3][packets[3].size() / 2] ^= 0x40;
  transport::write_records(dir / "bad.bin", packets);
  c.out_dir = dir / "cloud";
  c.transport.path = (dir / "bad.bin").string();
  const auto r = cmd_cloud_run(c);
  EXPECT_EQ(r.packets, 10);
  EXPECT_EQ(r.malformed, 1);
  EXPECT_EQ(r.reports, 9);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].kind, transport::DeliveryEventKind::kGap);
  EXPECT_EQ(r.events[0].frame_id, 3u);
  const auto summary = json::parse(slurp(dir / "cloud" / "cloud_summary.json"));
  EXPECT_EQ(summary.at("integrity_errors"), 1);
  EXPECT_EQ(summary.at("gaps"), 1);
  EXPECT_EQ(count_lines(dir / "cloud" / "reports.jsonl"), 9);
}

TEST(Commands, DuplicatePacketIsLoggedOnce) {
  const fs::path dir = fresh_dir("dup");
  RunConfig c = small_config(dir / "edge");
  cmd_edge_run(c);
  auto packets = transport::read_records(dir / "edge" / "packets.bin");
  packets.insert(packets.begin() + 5, packets[2]);
  transport::write_records(dir / "dup.bin", packets);
  c.out_dir = dir / "cloud";
  c.transport.path = (dir / "dup.bin").string();
  const auto r = cmd_cloud_run(c);
  EXPECT_EQ(r.reports, 10);
  EXPECT_EQ(r.count(transport::DeliveryEventKind::kDuplicate), 1);
}

TEST(Commands, SocketTransportDeliversEveryPacket) {
  transport::TcpListener probe(transport::parse_endpoint("127.0.0.1:0"));
  const std::string addr = "127.0.0.1:" + std::to_string(probe.port());
  const fs::path dir = fresh_dir("sock");

  // The listener is ours; hand its port to the edge and read it directly.
  RunConfig c = small_config(dir / "edge", 5);
  c.transport = {TransportKind::kSocket, addr, ""};
  std::thread edge([&] { cmd_edge_run(c); });
  auto source = probe.accept();
  RunConfig cc = c;
  cc.out_dir = dir / "cloud";
  ensure_dir(cc.out_dir);
  Artifacts art(cc.out_dir);
  JsonLog log;
  const auto r = run_cloud(cc, source, log, art, transport::steady_clock_source());
  edge.join();
  EXPECT_EQ(r.packets, 5);
  EXPECT_EQ(r.reports, 5);
}

TEST(Commands, ConnectFailsAfterRetries) {
  transport::RetryPolicy p;
  std::vector<int> waits;
  p.sleep = [&](std::chrono::milliseconds d) { waits.push_back(static_cast<int>(d.count())); };
  // Port 1 on loopback is closed in the test environment.
  EXPECT_THROW(transport::TcpSink::connect(transport::parse_endpoint("127.0.0.1:1"), p), Error);
  EXPECT_EQ(waits, (std::vector<int>{100, 200, 400}));
}

TEST(E2e, StandOnlySceneIsFullyCorrect) {
  RunConfig c;
  c.scenario = "stand";
  c.seed = 2;
  c.out_dir = fresh_dir("stand");
  c.e2e_audit.independence_trials = 5;
  const auto r = cmd_e2e(c);
  EXPECT_GT(r.labels.scored, 0);
  EXPECT_EQ(r.labels.accuracy, 1.0);
  EXPECT_EQ(r.exit_code, kExitOk);
}

TEST(E2e, FallSceneRecall) {
  RunConfig c;
  c.scenario = "fall";
  c.seed = 3;
  c.out_dir = fresh_dir("fall");
  c.e2e_audit.independence_trials = 5;
  const auto r = cmd_e2e(c);
  EXPECT_GT(r.labels.fall_frames, 0);
  EXPECT_GE(r.labels.fall_recall, 0.95);
}

TEST(E2e, EmptySceneReportsOne) {
  RunConfig c;
  c.scenario = "empty";
  c.out_dir = fresh_dir("empty");
  c.e2e_audit.independence_trials = 5;
  const auto r = cmd_e2e(c);
  EXPECT_EQ(r.labels.scored, 0);
  EXPECT_EQ(r.labels.accuracy, 1.0);
  EXPECT_EQ(r.summary.at("labels").at("accuracy"), 1.0);
}

TEST(E2e, SummaryReferencesEveryFile) {
  RunConfig c = small_config(fresh_dir("files"), 12);
  c.e2e_audit.independence_trials = 5;
  const auto r = cmd_e2e(c);
  std::set<std::string> on_disk;
  for (const auto& e : fs::recursive_directory_iterator(c.out_dir))
    if (e.is_regular_file()) on_disk.insert(fs::relative(e.path(), c.out_dir).generic_string());
  const auto listed = json::parse(slurp(c.out_dir / "summary.json")).at("files").get<std::set<std::string>>();
  EXPECT_EQ(on_disk, listed);
  EXPECT_TRUE(listed.count("timing.json"));
  EXPECT_TRUE(listed.count("recon/cam0_frame000011.png"));
  EXPECT_EQ(r.cloud.reports, 12);
}

TEST(E2e, GateViolationPropagates) {
  RunConfig c = small_config(fresh_dir("gate"), 8);
  c.inject_gate_violation_at = 2;
  EXPECT_THROW(cmd_e2e(c), GateAbort);
  EXPECT_EQ(transport::read_records(c.out_dir / "packets.bin").size(), 2u);
}

TEST(E2e, RawDumpIsOptInAndListed) {
  RunConfig c = small_config(fresh_dir("raw"), 3);
  c.unsafe_dump_raw = true;
  c.e2e_audit.independence_trials = 5;
  const auto r = cmd_e2e(c);
  EXPECT_TRUE(fs::exists(c.out_dir / "raw_unsafe" / "cam0_frame000002.png"));
  EXPECT_NE(slurp(c.out_dir / "edge_log.jsonl").find("unsafe_dump_raw"), std::string::npos);
  RunConfig d = small_config(fresh_dir("noraw"), 3);
  d.e2e_audit.independence_trials = 5;
  cmd_e2e(d);
  EXPECT_FALSE(fs::exists(d.out_dir / "raw_unsafe"));
}

TEST(Audit, SmallAuditPassesAndWritesReport) {
  RunConfig c = small_config(fresh_dir("audit"), 6);
  c.audit = {50, 3, 12, 2, 4, true};
  const auto r = cmd_audit(c);
  EXPECT_EQ(r.exit_code, r.report.passed() ? kExitOk : kExitAudit);
  const auto j = json::parse(slurp(c.out_dir / "audit.json"));
  EXPECT_EQ(j.at("independence").at("failures"), 0);
  EXPECT_EQ(j.at("identity_attack").at("gallery_size"), 3);
  EXPECT_EQ(j.at("leak_scan").at("frames").size(), 6u);
}

}  // namespace
}  // namespace pcv::app
