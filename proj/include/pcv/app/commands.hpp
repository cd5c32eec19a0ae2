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
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "pcv/app/config.hpp"
#include "pcv/app/link.hpp"
#include "pcv/app/metrics.hpp"
#include "pcv/audit/attack.hpp"
#include "pcv/audit/independence.hpp"
#include "pcv/audit/leak.hpp"
#include "pcv/audit/report.hpp"
#include "pcv/cloud/infer.hpp"
#include "pcv/cloud/reconstruct.hpp"
#include "pcv/core/png.hpp"
#include "pcv/edge/pipeline.hpp"
#include "pcv/sim/render.hpp"
#include "pcv/sim/scene_io.hpp"
#include "pcv/transport/gate.hpp"
#include "pcv/transport/reorder.hpp"
#include "pcv/transport/stream.hpp"
#include "pcv/transport/wire.hpp"

namespace pcv::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitGate = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitAudit = 4;

inline int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kPrivacy: return kExitGate;
    case ErrorKind::kIo: return kExitIo;
    default: return kExitValidation;
  }
}

// Raised when the privacy gate stops the edge stream.
class GateAbort : public Error {
 public:
  GateAbort(std::uint64_t frame_id, transport::GateReport report)
      : Error(ErrorKind::kPrivacy, "gate rejected frame " + std::to_string(frame_id) + ": " + report.summary()),
        frame_id_(frame_id),
        report_(std::move(report)) {}

  std::uint64_t frame_id() const { return frame_id_; }
  const transport::GateReport& report() const { return report_; }

 private:
  std::uint64_t frame_id_;
  transport::GateReport report_;
};

// ------------------------------------------------------------------ output

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) fail(ErrorKind::kIo, "cannot create directory " + dir.string());
  const auto probe = dir / ".pcv_write_probe";
  {
    std::ofstream os(probe);
    if (!os) fail(ErrorKind::kIo, "output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

// Files written under one output directory, recorded relative to it.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path path(const std::string& rel) {
    const auto p = root_ / rel;
    if (p.has_parent_path()) ensure_parent(p.parent_path());
    std::lock_guard lock(mu_);
    if (std::find(files_.begin(), files_.end(), rel) == files_.end()) files_.push_back(rel);
    return p;
  }

  std::vector<std::string> files() const {
    std::lock_guard lock(mu_);
    auto f = files_;
    std::sort(f.begin(), f.end());
    return f;
  }

 private:
  void ensure_parent(const std::filesystem::path& dir) {
    std::lock_guard lock(mu_);
    if (made_.count(dir.string())) return;
    ensure_dir(dir);
    made_.insert(dir.string());
  }

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::vector<std::string> files_;
  std::set<std::string> made_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::kIo, "cannot open " + p.string() + " for writing");
  os << text;
  if (!os) fail(ErrorKind::kIo, "short write to " + p.string());
}

inline void write_json(const std::filesystem::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

inline std::int64_t unix_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// JSON-lines log: {"event": ..., <fields>, "wall_time_us": ...}.
class JsonLog {
 public:
  JsonLog() = default;
  explicit JsonLog(const std::filesystem::path& p) : os_(std::make_unique<std::ofstream>(p, std::ios::trunc)) {
    if (!*os_) fail(ErrorKind::kIo, "cannot open log " + p.string());
  }

  void write(const std::string& event, json fields = json::object()) {
    if (!os_) return;
    json line = {{"event", event}};
    line.update(fields);
    line["wall_time_us"] = unix_us();
    std::lock_guard lock(mu_);
    *os_ << line.dump() << "\n";
    os_->flush();
  }

 private:
  std::unique_ptr<std::ofstream> os_;
  std::mutex mu_;
};

inline std::string frame_name(const char* prefix, std::uint32_t camera, std::uint64_t frame) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%scam%u_frame%06llu.png", prefix, camera, static_cast<unsigned long long>(frame));
  return buf;
}

inline json report_to_json(const cloud::BehaviorReport& r) {
  json subjects = json::array();
  for (const auto& e : r.entries)
    subjects.push_back({{"subject_id", e.subject_id},
                        {"box", {e.box.x, e.box.y, e.box.w, e.box.h}},
                        {"label", std::string(cloud::to_string(e.label))},
                        {"confidence", e.confidence}});
  return {{"camera_id", r.key.camera_id},
          {"frame_id", r.key.frame_id},
          {"timestamp_us", r.key.timestamp_us},
          {"subjects", subjects}};
}

inline json event_to_json(const transport::DeliveryEvent& e) {
  return {{"kind", std::string(transport::to_string(e.kind))}, {"camera_id", e.camera_id}, {"frame_id", e.frame_id}};
}

// -------------------------------------------------------------------- sim

struct SimResult {
  int frames = 0;
  std::vector<std::string> files;
};

// Frames as PNG plus one ground-truth JSON line per frame.
inline SimResult cmd_sim_generate(const RunConfig& cfg) {
  ensure_dir(cfg.out_dir);
  const sim::SceneSpec spec = resolve_scene(cfg);
  sim::SceneRenderer renderer(spec);
  Artifacts art(cfg.out_dir);
  write_json(art.path("scene.json"), sim::scene_to_json(spec));
  std::ofstream gt(art.path("gt.jsonl"), std::ios::trunc);
  if (!gt) fail(ErrorKind::kIo, "cannot write gt.jsonl");
  for (int t = 0; t < spec.frame_count; ++t) {
    auto [frame, truth] = renderer.render(t);
    write_file(art.path(frame_name("frames/", cfg.camera_id, t)), encode_png(frame));
    gt << sim::ground_truth_record(truth).dump() << "\n";
  }
  gt.close();
  if (!gt) fail(ErrorKind::kIo, "short write to gt.jsonl");
  SimResult r{spec.frame_count, {}};
  const auto summary_path = art.path("sim_summary.json");
  r.files = art.files();
  write_json(summary_path, {{"command", "sim"}, {"frames", r.frames}, {"files", r.files}});
  return r;
}

// ------------------------------------------------------------------- edge

struct EdgeRunResult {
  int frames = 0;
  int packets = 0;
  std::uint64_t bytes = 0;
  double edge_ms = 0;  // total process_frame time
};

using EdgeFrameHook =
    std::function<void(int frame, const Frame& raw, const sim::GroundTruthFrame& gt, const edge::EdgeOutput& out)>;

// Runs the edge over `spec`, sending one packet per frame. Stops at the first
// gate violation, before that frame is sent.
inline EdgeRunResult run_edge(const RunConfig& cfg, const sim::SceneSpec& spec, transport::PacketSink& sink,
                              JsonLog& log, Artifacts& art, const EdgeFrameHook& hook = {}) {
  sim::SceneRenderer renderer(spec);
  const Size size{spec.width, spec.height};
  edge::EdgeState state(size, cfg.edge);
  EdgeRunResult r;
  if (cfg.unsafe_dump_raw) log.write("unsafe_dump_raw", {{"warning", "raw frames with human pixels are written to disk"}});
  for (int t = 0; t < spec.frame_count; ++t) {
    auto [frame, gt] = renderer.render(t);
    const auto t0 = std::chrono::steady_clock::now();
    const edge::EdgeOutput out = edge::process_frame(frame, state, &gt);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    r.edge_ms += ms;
    ++r.frames;
    if (hook) hook(t, frame, gt, out);
    if (cfg.unsafe_dump_raw) write_file(art.path(frame_name("raw_unsafe/", cfg.camera_id, t)), encode_png(frame));

    auto tuple = make_tuple(out, sync_key(cfg.camera_id, t, cfg.fps));
    if (t == cfg.inject_gate_violation_at) tuple.flags |= 0x01;
    const auto report = transport::privacy_gate(tuple, size);
    if (!report.ok()) {
      json v = json::array();
      for (const auto& x : report.violations) v.push_back({{"rule", x.rule}, {"detail", x.detail}});
      log.write("gate_violation", {{"frame_id", t}, {"violations", v}});
      sink.close();
      throw GateAbort(t, report);
    }
    const auto packet = transport::encode(tuple);
    sink.send(packet);
    ++r.packets;
    r.bytes += packet.size();
    log.write("frame", {{"frame_id", t},
                        {"subjects", out.poses.size()},
                        {"bytes", packet.size()},
                        {"edge_ms", ms}});
  }
  sink.close();
  return r;
}

// Sends to `cfg.transport` (socket when kind is socket, else a record file).
inline EdgeRunResult cmd_edge_run(const RunConfig& cfg) {
  ensure_dir(cfg.out_dir);
  Artifacts art(cfg.out_dir);
  JsonLog log(art.path("edge_log.jsonl"));
  const auto spec = resolve_scene(cfg);
  std::unique_ptr<transport::PacketSink> sink;
  std::string target;
  if (cfg.transport.kind == TransportKind::kSocket) {
    target = cfg.transport.address;
    sink = std::make_unique<transport::TcpSink>(transport::TcpSink::connect(transport::parse_endpoint(target)));
  } else {
    target = cfg.transport.path.empty() ? art.path("packets.bin").string() : cfg.transport.path;
    if (!cfg.transport.path.empty()) art.path(std::filesystem::relative(target, cfg.out_dir).string());
    sink = std::make_unique<transport::RecordFileSink>(target);
  }
  const auto summary_path = art.path("edge_summary.json");
  json summary = {{"command", "edge"}, {"target", target}, {"config", config_to_json(cfg)}};
  try {
    const auto r = run_edge(cfg, spec, *sink, log, art);
    summary["frames"] = r.frames;
    summary["packets"] = r.packets;
    summary["files"] = art.files();
    write_json(summary_path, summary);
    return r;
  } catch (const GateAbort& g) {
    summary["gate_violation"] = {{"frame_id", g.frame_id()}, {"report", g.report().summary()}};
    summary["files"] = art.files();
    write_json(summary_path, summary);
    throw;
  }
}

// ------------------------------------------------------------------ cloud

struct CloudRunResult {
  int packets = 0;
  int reports = 0;
  int malformed = 0;
  std::vector<transport::DeliveryEvent> events;
  std::vector<std::string> report_lines;

  int count(transport::DeliveryEventKind k) const {
    return static_cast<int>(std::count_if(events.begin(), events.end(), [k](const auto& e) { return e.kind == k; }));
  }
};

using CloudFrameHook = std::function<void(const cloud::CloudFrame&)>;

// Decode, reorder, infer and reconstruct until the source ends. Malformed
// packets are logged and skipped.
inline CloudRunResult run_cloud(const RunConfig& cfg, transport::PacketSource& source, JsonLog& log, Artifacts& art,
                                transport::Clock clock, const CloudFrameHook& hook = {}) {
  transport::ReorderConfig rc = cfg.reorder;
  rc.first_frame_id = 0;
  transport::ReorderBuffer buffer(rc, std::move(clock));
  cloud::CloudSession session(cfg.classifier);
  CloudRunResult r;
  std::ofstream reports(art.path("reports.jsonl"), std::ios::trunc);
  if (!reports) fail(ErrorKind::kIo, "cannot write reports.jsonl");

  auto handle = [&](transport::Delivery d) {
    for (const auto& e : d.events) {
      log.write(std::string(transport::to_string(e.kind)), event_to_json(e));
      r.events.push_back(e);
    }
    for (auto& t : d.released) {
      const auto frame = cloud::process_tuple(session, t, cfg.edge.proxy);
      const std::string line = report_to_json(frame.report).dump();
      reports << line << "\n";
      r.report_lines.push_back(line);
      write_file(art.path(frame_name("recon/", t.key.camera_id, t.key.frame_id)), encode_png(frame.scene.raster));
      ++r.reports;
      if (hook) hook(frame);
    }
  };

  while (auto packet = source.next()) {
    ++r.packets;
    transport::RepresentationTuple t;
    try {
      t = transport::decode(*packet);
    } catch (const Error& e) {
      ++r.malformed;
      log.write("malformed", {{"packet", r.packets - 1}, {"kind", std::string(to_string(e.kind()))}, {"detail", e.detail()}});
      continue;
    }
    if (t.key.camera_id != cfg.camera_id) {
      ++r.malformed;
      log.write("foreign_camera", {{"packet", r.packets - 1}, {"camera_id", t.key.camera_id}});
      continue;
    }
    handle(buffer.accept(std::move(t)));
  }
  handle(buffer.drain());
  reports.close();
  if (!reports) fail(ErrorKind::kIo, "short write to reports.jsonl");
  log.write("end_of_stream", {{"packets", r.packets}, {"reports", r.reports}, {"malformed", r.malformed}});
  return r;
}

// Frozen clock for replays: only frame ids decide gaps.
inline transport::Clock replay_clock() {
  const auto t = std::chrono::steady_clock::time_point{};
  return [t] { return t; };
}

struct CloudSource {
  std::unique_ptr<transport::PacketSource> source;
  transport::Clock clock;
  std::string description;
};

inline json cloud_summary(const CloudRunResult& r) {
  using transport::DeliveryEventKind;
  json events = json::array();
  for (const auto& e : r.events) events.push_back(event_to_json(e));
  return {{"packets", r.packets},
          {"reports", r.reports},
          {"integrity_errors", r.malformed},
          {"gaps", r.count(DeliveryEventKind::kGap)},
          {"duplicates", r.count(DeliveryEventKind::kDuplicate)},
          {"overflows", r.count(DeliveryEventKind::kOverflow)},
          {"events", events}};
}

// Reads from a socket (listen) or a record file (replay).
inline CloudRunResult cmd_cloud_run(const RunConfig& cfg) {
  ensure_dir(cfg.out_dir);
  Artifacts art(cfg.out_dir);
  JsonLog log(art.path("cloud_log.jsonl"));
  CloudSource src;
  if (cfg.transport.kind == TransportKind::kSocket) {
    transport::TcpListener listener(transport::parse_endpoint(cfg.transport.address));
    log.write("listening", {{"port", listener.port()}});
    src = {std::make_unique<transport::TcpSource>(listener.accept()), transport::steady_clock_source(),
           cfg.transport.address};
  } else {
    const std::string path = cfg.transport.path.empty() ? (cfg.out_dir / "packets.bin").string() : cfg.transport.path;
    src = {std::make_unique<transport::RecordFileSource>(path), replay_clock(), path};
  }
  const auto r = run_cloud(cfg, *src.source, log, art, src.clock);
  const auto summary_path = art.path("cloud_summary.json");
  json summary = cloud_summary(r);
  summary["command"] = "cloud";
  summary["source"] = src.description;
  summary["files"] = art.files();
  write_json(summary_path, summary);
  return r;
}

// ------------------------------------------------------------------- audit

inline audit::AuditReport run_audit(const RunConfig& cfg, const AuditConfig& a, const sim::SceneSpec& scene,
                                    JsonLog& log) {
  audit::AuditReport rep;
  rep.bounds = {a.attack_margin, a.control_min, a.leak_threshold};
  if (a.independence_trials > 0) {
    rep.independence = audit::mask_independence_audit(a.independence_trials, cfg.seed);
    log.write("independence", {{"trials", rep.independence->trials}, {"failures", rep.independence->failures}});
  }
  if (a.attack_probes > 0) {
    audit::AttackConfig ac;
    ac.frames_per_scene = a.frames_per_scene;
    ac.enrollment_scenes = a.enrollment_scenes;
    ac.edge = cfg.edge;
    const auto looks = sim::distinct_appearances(a.attack_actors, cfg.seed);
    const auto gallery = audit::build_gallery(looks, cfg.seed + 1, ac);
    rep.attack = audit::identity_attack(gallery, a.attack_probes, cfg.seed + 2, ac);
    log.write("identity_attack",
              {{"accuracy", rep.attack->tuples.accuracy}, {"control", rep.attack->control.accuracy}});
  }
  if (a.leak_scan) {
    sim::SceneRenderer renderer(scene);
    const Size size{scene.width, scene.height};
    edge::EdgeState state(size, cfg.edge);
    for (int t = 0; t < scene.frame_count; ++t) {
      auto [frame, gt] = renderer.render(t);
      const auto out = edge::process_frame(frame, state, &gt);
      rep.leak_scan.push_back({static_cast<std::uint64_t>(t),
                               audit::pixel_leak_scan(out.desensitized.image, frame, gt.joint_mask(size))});
    }
    log.write("leak_scan", {{"frames", scene.frame_count}, {"peak", rep.leak_peak()}});
  }
  return rep;
}

struct AuditRunResult {
  audit::AuditReport report;
  int exit_code = kExitOk;
};

inline AuditRunResult cmd_audit(const RunConfig& cfg) {
  ensure_dir(cfg.out_dir);
  Artifacts art(cfg.out_dir);
  JsonLog log(art.path("audit_log.jsonl"));
  AuditRunResult r;
  r.report = run_audit(cfg, cfg.audit, resolve_scene(cfg), log);
  r.exit_code = r.report.passed() ? kExitOk : kExitAudit;
  const auto path = art.path("audit.json");
  json j = audit::to_json(r.report);
  j["files"] = art.files();
  write_json(path, j);
  return r;
}

// -------------------------------------------------------------------- e2e

struct E2eResult {
  EdgeRunResult edge;
  CloudRunResult cloud;
  LabelScores labels;
  audit::AuditReport audit;
  std::vector<std::string> files;
  json summary;
  int exit_code = kExitOk;
};

// Tee for the in-process run: the queue feeds the cloud, the file keeps the
// packet stream.
class TeeSink : public transport::PacketSink {
 public:
  TeeSink(transport::PacketSink& a, transport::PacketSink& b) : a_(a), b_(b) {}
  void send(std::span<const std::uint8_t> p) override {
    a_.send(p);
    b_.send(p);
  }
  void close() override {
    a_.close();
    b_.close();
  }

 private:
  transport::PacketSink& a_;
  transport::PacketSink& b_;
};

// Edge and cloud as two threads joined by an ordered queue, scored against
// the simulator. Timing goes to timing.json so that every other file is a
// pure function of the config.
inline E2eResult cmd_e2e(const RunConfig& cfg) {
  const auto wall0 = std::chrono::steady_clock::now();
  ensure_dir(cfg.out_dir);
  Artifacts art(cfg.out_dir);
  JsonLog edge_log(art.path("edge_log.jsonl"));
  JsonLog cloud_log(art.path("cloud_log.jsonl"));
  const auto spec = resolve_scene(cfg);
  const Size size{spec.width, spec.height};

  // Edge-side facts the scorer needs, keyed by frame id.
  struct FrameTruth {
    sim::GroundTruthFrame gt;
    std::map<SubjectId, int> subjects;
  };
  std::mutex mu;
  std::map<std::uint64_t, FrameTruth> truth;
  std::vector<audit::LeakFrame> leaks;

  E2eResult res;
  transport::PacketQueue queue;
  transport::RecordFileSink file(art.path("packets.bin"));
  TeeSink tee(queue, file);
  std::exception_ptr edge_error;
  std::thread edge_thread([&] {
    try {
      res.edge = run_edge(cfg, spec, tee, edge_log, art,
                          [&](int t, const Frame& raw, const sim::GroundTruthFrame& gt, const edge::EdgeOutput& out) {
                            FrameTruth ft{gt, subject_actors(out, gt, size)};
                            for (auto& a : ft.gt.actors) a.mask = Bitmap();
                            std::optional<audit::LeakFrame> leak;
                            if (cfg.e2e_audit.leak_scan)
                              leak = audit::LeakFrame{static_cast<std::uint64_t>(t),
                                                      audit::pixel_leak_scan(out.desensitized.image, raw,
                                                                             gt.joint_mask(size))};
                            std::lock_guard lock(mu);
                            truth.emplace(t, std::move(ft));
                            if (leak) leaks.push_back(*leak);
                          });
    } catch (...) {
      edge_error = std::current_exception();
      tee.close();
    }
  });

  std::vector<LabelRecord> records;
  try {
    res.cloud = run_cloud(cfg, queue, cloud_log, art, transport::steady_clock_source(),
                          [&](const cloud::CloudFrame& f) {
                            std::lock_guard lock(mu);
                            auto it = truth.find(f.report.key.frame_id);
                            if (it != truth.end()) record_labels(f.report, it->second.subjects, it->second.gt, spec, records);
                          });
  } catch (...) {
    queue.close();
    edge_thread.join();
    throw;
  }
  edge_thread.join();

  json summary;
  summary["command"] = "e2e";
  summary["config"] = config_to_json(cfg);
  summary["config"].erase("out_dir");
  summary["scene"] = {{"frames", spec.frame_count}, {"actors", spec.actors.size()}, {"width", spec.width},
                      {"height", spec.height}};
  summary["edge"] = {{"frames", res.edge.frames}, {"packets", res.edge.packets}, {"bytes", res.edge.bytes}};
  summary["cloud"] = cloud_summary(res.cloud);

  if (edge_error) {
    try {
      std::rethrow_exception(edge_error);
    } catch (const GateAbort& g) {
      summary["gate_violation"] = {{"frame_id", g.frame_id()}, {"report", g.report().summary()}};
      summary["files"] = art.files();
      write_json(art.path("summary.json"), summary);
      throw;
    }
  }

  res.labels = score_labels(records);
  summary["labels"] = {{"scored", res.labels.scored},
                       {"correct", res.labels.correct},
                       {"accuracy", res.labels.accuracy},
                       {"fall_frames", res.labels.fall_frames},
                       {"fall_recall", res.labels.fall_recall},
                       {"false_fall_rate", res.labels.false_fall_rate},
                       {"tolerance_frames", 5}};

  AuditConfig quick = cfg.e2e_audit;
  quick.leak_scan = false;  // scanned inline above
  res.audit = run_audit(cfg, quick, spec, edge_log);
  std::sort(leaks.begin(), leaks.end(), [](const auto& a, const auto& b) { return a.frame_id < b.frame_id; });
  res.audit.leak_scan = std::move(leaks);
  json audit_json = audit::to_json(res.audit);
  summary["audit"] = {{"passed", res.audit.passed()}, {"leak_peak", res.audit.leak_peak()}};
  if (res.audit.independence) summary["audit"]["independence"] = audit_json["independence"];
  if (res.audit.attack) summary["audit"]["identity_attack"] = audit_json["identity_attack"];
  write_json(art.path("audit.json"), audit_json);

  const double wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  write_json(art.path("timing.json"),
             {{"wall_s", wall_s},
              {"edge_ms_total", res.edge.edge_ms},
              {"edge_ms_per_frame", res.edge.frames > 0 ? res.edge.edge_ms / res.edge.frames : 0.0}});

  const auto summary_path = art.path("summary.json");
  res.files = art.files();
  summary["files"] = res.files;
  write_json(summary_path, summary);
  res.summary = summary;
  res.exit_code = res.audit.passed() ? kExitOk : kExitAudit;
  return res;
}

}  // namespace pcv::app
