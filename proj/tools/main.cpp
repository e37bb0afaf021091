// Copyright 2026 The farmwatch Authors
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

#include <CLI11.hpp>
#include <signal.h>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "farmwatch/agent_sim.hpp"
#include "farmwatch/config.hpp"
#include "farmwatch/daemon.hpp"
#include "farmwatch/rrd.hpp"

namespace fw = farmwatch;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitBind = 2;

sigset_t termination_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  return set;
}

// Blocked before any thread starts so that only wait_for_termination sees them.
void block_termination_signals() {
  auto set = termination_signals();
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

int wait_for_termination() {
  auto set = termination_signals();
  int sig = 0;
  sigwait(&set, &sig);
  return sig;
}

void print_diagnostics(const fw::ConfigError& e, const std::string& path) {
  for (const auto& d : e.diagnostics()) std::cerr << path << ": " << d.str() << '\n';
}

int cmd_check(const std::string& path) {
  try {
    auto diags = fw::check_config(path);
    for (const auto& d : diags) std::cerr << path << ": " << d.str() << '\n';
    if (!diags.empty()) return kExitConfig;
  } catch (const fw::ConfigError& e) {
    print_diagnostics(e, path);
    return kExitConfig;
  }
  std::cout << path << ": ok\n";
  return 0;
}

struct RunOptions {
  std::string config;
  double timeout = 5;
  int retries = 1;
  std::string xslt = "xsltproc {} -";
  std::optional<int> http_port;
  double flush_interval = 300;
};

int cmd_run(const RunOptions& o) {
  fw::MonitorConfig cfg;
  try {
    cfg = fw::load_config(o.config);
  } catch (const fw::ConfigError& e) {
    print_diagnostics(e, o.config);
    return kExitConfig;
  }
  if (o.http_port) cfg.http_port = *o.http_port;
  fw::configure_logging(cfg);

  fw::DaemonOptions opts;
  opts.collector.timeout = o.timeout;
  opts.collector.retries = o.retries;
  opts.xslt_command = o.xslt;
  opts.flush_interval = o.flush_interval;

  block_termination_signals();
  std::unique_ptr<fw::Monitor> monitor;
  try {
    monitor = std::make_unique<fw::Monitor>(cfg, opts);
  } catch (const fw::ArchiveMismatch& e) {
    std::cerr << "farmwatch: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fw::rrd::RrdError& e) {
    std::cerr << "farmwatch: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::system_error& e) {
    std::cerr << "farmwatch: " << e.what() << '\n';
    return kExitBind;
  }
  std::cout << "listening on port " << monitor->http_port() << std::endl;
  monitor->start();
  int sig = wait_for_termination();
  spdlog::info("received signal {}, shutting down", sig);
  monitor->shutdown();
  return 0;
}

int cmd_rrd_dump(const std::string& file) {
  try {
    std::cout << fw::rrd::dump(fw::rrd::Rrd::load(file));
  } catch (const std::exception& e) {
    std::cerr << "farmwatch: " << file << ": " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}

struct SimOptions {
  std::size_t count = 1;
  std::uint64_t seed = 1;
  std::string config_out;
  std::int64_t polldelay = 30;
  bool wall_clock = false;
};

int cmd_simfarm(const SimOptions& o) {
  block_termination_signals();
  std::unique_ptr<fw::sim::Farm> farm;
  try {
    farm = fw::sim::spawn_farm(o.count, fw::sim::table1_script(), o.seed,
                               o.wall_clock ? fw::sim::Farm::TimeBase::WallClock : fw::sim::Farm::TimeBase::AgentStart);
  } catch (const fw::sim::BindFailure& e) {
    std::cerr << "farmwatch: " << e.what() << '\n';
    return kExitBind;
  }
  fw::MonitorConfig cfg;
  cfg.hosts = farm->host_configs(o.polldelay);
  auto doc = fw::serialize_config(cfg);
  if (o.config_out.empty()) {
    std::cout << doc << std::flush;
  } else {
    std::ofstream out(o.config_out, std::ios::binary);
    out << doc;
    if (!out.flush()) {
      std::cerr << "farmwatch: cannot write " << o.config_out << '\n';
      return kExitConfig;
    }
    std::cout << "serving " << farm->size() << " agents; config written to " << o.config_out << std::endl;
  }
  wait_for_termination();
  farm->stop();
  auto& st = farm->stats();
  std::cerr << "requests " << st.requests.load() << " (" << st.request_bytes.load() << " B), responses "
            << st.responses.load() << " (" << st.response_bytes.load() << " B)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster monitor: SNMP polling, round-robin archives and an HTTP status server"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Poll the configured hosts and serve status until terminated");
  run_cmd->add_option("config", run.config, "Configuration file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--timeout", run.timeout, "Seconds to wait for an agent reply")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--retries", run.retries, "Retransmissions before a poll times out")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--xslt-processor", run.xslt, "Stylesheet command; {} is the stylesheet path")
      ->capture_default_str();
  run_cmd->add_option("--http-port", run.http_port, "Override the configured port; 0 picks a free one")
      ->check(CLI::Range(0, 65535));
  run_cmd->add_option("--flush-interval", run.flush_interval, "Seconds between archive writes")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  std::string check_path;
  auto* check_cmd = app.add_subcommand("check", "Validate a configuration file");
  check_cmd->add_option("config", check_path, "Configuration file")->required();

  std::string dump_path;
  auto* dump_cmd = app.add_subcommand("rrd-dump", "Print an archive file as text");
  dump_cmd->add_option("file", dump_path, "Archive file")->required();
  auto* rrd_cmd = app.add_subcommand("rrd", "Archive utilities");
  rrd_cmd->require_subcommand(1);
  rrd_cmd->add_subcommand("dump", "Print an archive file as text")
      ->add_option("file", dump_path, "Archive file")
      ->required();

  SimOptions sim;
  auto* sim_cmd = app.add_subcommand("simfarm", "Run simulated SNMP agents and emit a matching configuration");
  sim_cmd->add_option("--count", sim.count, "Number of agents")->required()->check(CLI::Range(1, 10000));
  sim_cmd->add_option("--seed", sim.seed, "Seed for generator offsets")->required();
  sim_cmd->add_option("--config-out", sim.config_out, "Write the configuration here instead of stdout");
  sim_cmd->add_option("--polldelay", sim.polldelay, "Poll interval written to the configuration")
      ->capture_default_str()
      ->check(CLI::Range(1, 86400));
  sim_cmd->add_flag("--wall-clock", sim.wall_clock, "Drive generators from the wall clock");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  if (*run_cmd) return cmd_run(run);
  if (*check_cmd) return cmd_check(check_path);
  if (*dump_cmd || *rrd_cmd) return cmd_rrd_dump(dump_path);
  if (*sim_cmd) return cmd_simfarm(sim);
  return kExitConfig;
}
