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

// pcv: simulator, edge, cloud, end-to-end and audit front end.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pcv/app/commands.hpp"

namespace {

using pcv::app::RunConfig;
using pcv::app::TransportKind;

struct Overrides {
  std::string config;
  std::string mode;
  std::string scenario;
  std::string scene;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string connect;
  std::string listen;
  std::string packets;
  bool unsafe_dump_raw = false;
  std::optional<int> trials;
  std::optional<int> probes;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--mode", o.mode, "perception mode: oracle or heuristic");
  app->add_option("--scenario", o.scenario, "built-in scene name");
  app->add_option("--scene", o.scene, "scene JSON file")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "run seed");
  app->add_option("-o,--out", o.out, "output directory");
}

RunConfig build_config(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : pcv::app::load_config(o.config);
  if (!o.mode.empty()) c.edge.mode = pcv::parse_mode(o.mode);
  if (!o.scenario.empty()) {
    c.scenario = o.scenario;
    c.scene.reset();
    c.scene_path.clear();
  }
  if (!o.scene.empty()) {
    c.scene.reset();
    c.scene_path = o.scene;
  }
  if (o.seed) {
    c.seed = *o.seed;
    c.edge.seed = *o.seed;
  }
  if (!o.out.empty()) c.out_dir = o.out;
  if (!o.connect.empty()) {
    c.transport.kind = TransportKind::kSocket;
    c.transport.address = o.connect;
  }
  if (!o.listen.empty()) {
    c.transport.kind = TransportKind::kSocket;
    c.transport.address = o.listen;
  }
  if (!o.packets.empty()) {
    c.transport.kind = TransportKind::kFile;
    c.transport.path = o.packets;
  }
  if (o.unsafe_dump_raw) c.unsafe_dump_raw = true;
  if (o.trials) c.audit.independence_trials = *o.trials;
  if (o.probes) c.audit.attack_probes = *o.probes;
  pcv::app::validate(c);
  return c;
}

int run(const std::string& command, const Overrides& o) {
  using namespace pcv::app;
  const RunConfig cfg = build_config(o);
  if (command == "sim") {
    const auto r = cmd_sim_generate(cfg);
    std::printf("sim: %d frames -> %s\n", r.frames, cfg.out_dir.string().c_str());
    return kExitOk;
  }
  if (command == "edge") {
    const auto r = cmd_edge_run(cfg);
    std::printf("edge: %d frames, %d packets, %llu bytes\n", r.frames, r.packets,
                static_cast<unsigned long long>(r.bytes));
    return kExitOk;
  }
  if (command == "cloud") {
    const auto r = cmd_cloud_run(cfg);
    std::printf("cloud: %d packets, %d reports, %d malformed, %zu events\n", r.packets, r.reports, r.malformed,
                r.events.size());
    return kExitOk;
  }
  if (command == "e2e") {
    const auto r = cmd_e2e(cfg);
    std::printf("e2e: %d frames, %d reports, label accuracy %.4f, fall recall %.4f, audit %s\n", r.edge.frames,
                r.cloud.reports, r.labels.accuracy, r.labels.fall_recall, r.audit.passed() ? "passed" : "FAILED");
    return r.exit_code;
  }
  const auto r = cmd_audit(cfg);
  std::printf("audit: %s (see %s)\n", r.report.passed() ? "passed" : "FAILED",
              (cfg.out_dir / "audit.json").string().c_str());
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving edge/cloud perception pipeline"};
  app.require_subcommand(1);
  Overrides o;

  auto* sim = app.add_subcommand("sim", "render a scene to PNG frames and ground truth");
  add_common(sim, o);

  auto* edge = app.add_subcommand("edge", "run the edge and emit packets");
  add_common(edge, o);
  auto* connect = edge->add_option("--connect", o.connect, "send packets to HOST:PORT");
  edge->add_option("--packets", o.packets, "write packets to this record file")->excludes(connect);
  edge->add_flag("--unsafe-dump-raw", o.unsafe_dump_raw, "also write raw frames (contains people; debugging only)");

  auto* cloud = app.add_subcommand("cloud", "consume packets, infer behaviour, reconstruct frames");
  add_common(cloud, o);
  auto* listen = cloud->add_option("--listen", o.listen, "accept one edge connection on HOST:PORT");
  cloud->add_option("--replay", o.packets, "read packets from a record file")->excludes(listen);

  auto* e2e = app.add_subcommand("e2e", "edge and cloud in one process, scored against ground truth");
  add_common(e2e, o);
  e2e->add_flag("--unsafe-dump-raw", o.unsafe_dump_raw, "also write raw frames (contains people; debugging only)");

  auto* aud = app.add_subcommand("audit", "mask independence, identity attack and pixel leak scan");
  add_common(aud, o);
  aud->add_option("--trials", o.trials, "mask independence trials")->check(CLI::PositiveNumber);
  aud->add_option("--probes", o.probes, "identity attack probe scenes (0 skips)")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pcv::app::kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const pcv::Error& e) {
    std::cerr << "pcv " << command << ": " << e.what() << "\n";
    return pcv::app::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "pcv " << command << ": " << e.what() << "\n";
    return pcv::app::kExitIo;
  }
}
