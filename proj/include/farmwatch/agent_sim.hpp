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

#pragma once

#include <poll.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "farmwatch/config.hpp"
#include "farmwatch/net.hpp"
#include "farmwatch/snmp/message.hpp"

namespace farmwatch::sim {

struct Constant {
  double value = 0;
};
struct Ramp {
  double rate = 1;  // per second
};
struct Sine {
  double mean = 0;
  double amplitude = 1;
  double period = 60;  // seconds
};
struct Counter {
  double rate = 1;  // per second
  int width = 32;   // 32 or 64
};

using Generator = std::variant<Constant, Ramp, Sine, Counter>;

struct SimVariable {
  std::string id;  // mib id used when emitting host config
  snmp::Oid oid;
  Generator gen;
};

struct Faults {
  double drop_probability = 0;
  bool silent = false;
  std::set<snmp::Oid> error_oids;  // answered with NoSuchObject
};

struct AgentScript {
  std::uint16_t port = 0;
  std::string community = "public";
  std::vector<SimVariable> variables;
  Faults faults;
};

class BindFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Request/response logic of one agent, independent of sockets and clocks.
class AgentLogic {
 public:
  AgentLogic(AgentScript script, std::uint64_t seed) : script_(std::move(script)), rng_(seed) {
    if (!(script_.faults.drop_probability >= 0 && script_.faults.drop_probability <= 1)) {
      throw std::invalid_argument("drop_probability must lie in [0, 1]");
    }
    std::mt19937_64 derive(seed);
    for (std::size_t i = 0; i < script_.variables.size(); ++i) {
      const auto& v = script_.variables[i];
      if (auto* c = std::get_if<Counter>(&v.gen); c && c->width != 32 && c->width != 64) {
        throw std::invalid_argument("counter width must be 32 or 64");
      }
      offsets_.push_back(derive());
      index_.emplace(v.oid, i);
    }
  }

  const AgentScript& script() const noexcept { return script_; }
  const Faults& faults() const noexcept { return script_.faults; }

  void set_faults(Faults f) {
    if (!(f.drop_probability >= 0 && f.drop_probability <= 1)) {
      throw std::invalid_argument("drop_probability must lie in [0, 1]");
    }
    script_.faults = std::move(f);
  }

  // Value of variable `i` at `t` seconds on the agent's clock.
  snmp::Value value_at(std::size_t i, double t) const {
    const auto offset = offsets_.at(i);
    return std::visit(
        [&](const auto& g) -> snmp::Value {
          using G = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<G, Constant>) {
            if (g.value < 0) return snmp::Integer{static_cast<std::int32_t>(std::llround(g.value))};
            return snmp::Gauge32{static_cast<std::uint32_t>(std::llround(g.value))};
          } else if constexpr (std::is_same_v<G, Ramp>) {
            auto v = static_cast<std::uint64_t>(std::floor(std::max(0.0, g.rate * t)));
            return snmp::Gauge32{static_cast<std::uint32_t>(v)};
          } else if constexpr (std::is_same_v<G, Sine>) {
            const double phase = static_cast<double>(offset % 1'000'000) / 1e6;
            const double v = g.mean + g.amplitude * std::sin(2 * M_PI * (t / g.period + phase));
            return snmp::Gauge32{static_cast<std::uint32_t>(std::llround(std::clamp(v, 0.0, 4294967295.0)))};
          } else {
            const auto steps = static_cast<std::uint64_t>(std::floor(std::max(0.0, g.rate * t)));
            if (g.width == 32) return snmp::Counter32{static_cast<std::uint32_t>(offset + steps)};
            return snmp::Counter64{offset + steps};
          }
        },
        script_.variables.at(i).gen);
  }

  // Reply to one datagram, or nullopt when the agent stays quiet.
  std::optional<snmp::Bytes> respond(std::span<const std::uint8_t> request, double t) {
    if (script_.faults.silent) return std::nullopt;
    snmp::SnmpMessage req;
    try {
      req = snmp::decode_message(request);
    } catch (const snmp::DecodeError&) {
      return std::nullopt;
    }
    if (req.pdu_type != snmp::PduType::GetRequest || req.community != script_.community) return std::nullopt;
    if (script_.faults.drop_probability > 0 &&
        std::uniform_real_distribution<double>(0, 1)(rng_) < script_.faults.drop_probability) {
      return std::nullopt;
    }
    snmp::SnmpMessage resp = req;
    resp.pdu_type = snmp::PduType::Response;
    const bool v1 = req.version == snmp::Version::V1;
    for (std::size_t i = 0; i < resp.varbinds.size(); ++i) {
      auto& vb = resp.varbinds[i];
      auto it = index_.find(vb.oid);
      if (it == index_.end() || script_.faults.error_oids.count(vb.oid)) {
        if (v1) {
          resp = req;
          resp.pdu_type = snmp::PduType::Response;
          resp.error_status = static_cast<std::int32_t>(snmp::ErrorStatus::NoSuchName);
          resp.error_index = static_cast<std::int32_t>(i + 1);
          break;
        }
        vb.value = snmp::NoSuchObject{};
        continue;
      }
      vb.value = value_at(it->second, t);
      if (auto* c = std::get_if<snmp::Counter64>(&vb.value); c && v1) {
        vb.value = snmp::Counter32{static_cast<std::uint32_t>(c->value)};
      }
    }
    try {
      return snmp::encode_message(resp);
    } catch (const snmp::EncodeError&) {
      return std::nullopt;
    }
  }

 private:
  AgentScript script_;
  std::vector<std::uint64_t> offsets_;
  std::map<snmp::Oid, std::size_t> index_;
  std::mt19937_64 rng_;
};

struct FarmStats {
  std::atomic<std::uint64_t> requests{0};
  std::atomic<std::uint64_t> request_bytes{0};
  std::atomic<std::uint64_t> responses{0};
  std::atomic<std::uint64_t> response_bytes{0};
};

// A set of agents sharing one reactor thread. Each agent owns a UDP socket.
class Farm {
 public:
  enum class TimeBase { AgentStart, WallClock };

  Farm(const std::vector<AgentScript>& scripts, const std::vector<std::uint64_t>& seeds,
       TimeBase base = TimeBase::AgentStart, const char* bind_addr = "127.0.0.1")
      : base_(base), start_(std::chrono::steady_clock::now()) {
    for (std::size_t i = 0; i < scripts.size(); ++i) {
      auto a = std::make_unique<Agent>(scripts[i], seeds.at(i));
      try {
        a->sock = net::UdpSocket::bind(scripts[i].port, bind_addr);
      } catch (const std::system_error& e) {
        throw BindFailure(e.what());
      }
      a->port = a->sock.local_port();
      agents_.push_back(std::move(a));
    }
    thread_ = std::thread([this] { loop(); });
  }

  Farm(const Farm&) = delete;
  Farm& operator=(const Farm&) = delete;
  ~Farm() { stop(); }

  std::size_t size() const noexcept { return agents_.size(); }
  std::uint16_t port(std::size_t i) const { return agents_.at(i)->port; }
  const FarmStats& stats() const noexcept { return stats_; }

  void inject_fault(std::size_t i, Faults f) {
    auto& a = *agents_.at(i);
    std::lock_guard lock(a.mu);
    a.logic.set_faults(std::move(f));
  }

  // Seconds on the agents' generator clock.
  double now() const {
    if (base_ == TimeBase::WallClock) {
      return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void stop() {
    if (stop_.exchange(true)) return;
    if (thread_.joinable()) thread_.join();
  }

  // Host entries pointing at this farm, named <prefix>000, <prefix>001, ...
  std::vector<HostConfig> host_configs(std::int64_t polldelay, std::vector<RraSpec> rras = {},
                                       const std::string& prefix = "sim") const {
    if (rras.empty()) rras.push_back({ConsolidationFn::Average, 0.8, polldelay, polldelay * 2880});
    std::vector<HostConfig> hosts;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      const auto& script = agents_[i]->logic.script();
      HostConfig h;
      char name[32];
      std::snprintf(name, sizeof name, "%s%03zu", prefix.c_str(), i);
      h.name = name;
      h.ip = "127.0.0.1:" + std::to_string(agents_[i]->port);
      h.polldelay = polldelay;
      for (const auto& v : script.variables) {
        MibSpec m;
        m.id = v.id;
        m.name = v.oid.str();
        m.oid = v.oid;
        m.kind = std::holds_alternative<Counter>(v.gen) ? VarKind::Counter : VarKind::Gauge;
        m.community = script.community;
        h.mibs.push_back(std::move(m));
      }
      h.rras = rras;
      if (!script.variables.empty()) {
        GraphSpec g;
        g.id = "g.png";
        g.title = h.name + " " + script.variables.front().id;
        g.lines = {"DEF:v=" + script.variables.front().id + ":AVERAGE",
                   "LINE2:v#0000FF:" + script.variables.front().id};
        g.program = grapher::parse_graph_script(g.lines);
        h.graphs.push_back(std::move(g));
      }
      hosts.push_back(std::move(h));
    }
    return hosts;
  }

 private:
  struct Agent {
    Agent(const AgentScript& s, std::uint64_t seed) : logic(s, seed) {}
    AgentLogic logic;
    net::UdpSocket sock;
    std::uint16_t port = 0;
    std::mutex mu;
  };

  void loop() {
    std::vector<pollfd> fds;
    for (const auto& a : agents_) fds.push_back({a->sock.fd(), POLLIN, 0});
    std::vector<std::uint8_t> buf;
    net::Endpoint from;
    while (!stop_.load()) {
      if (::poll(fds.data(), fds.size(), 50) <= 0) continue;
      for (std::size_t i = 0; i < fds.size(); ++i) {
        if (!(fds[i].revents & POLLIN)) continue;
        auto& a = *agents_[i];
        while (a.sock.recv_from(buf, from)) {
          ++stats_.requests;
          stats_.request_bytes += buf.size();
          std::optional<snmp::Bytes> reply;
          {
            std::lock_guard lock(a.mu);
            reply = a.logic.respond(buf, now());
          }
          if (!reply) continue;
          a.sock.send_to(from, *reply);
          ++stats_.responses;
          stats_.response_bytes += reply->size();
        }
      }
    }
  }

  TimeBase base_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::unique_ptr<Agent>> agents_;
  FarmStats stats_;
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

inline std::unique_ptr<Farm> start_agent(const AgentScript& script, std::uint64_t seed,
                                         Farm::TimeBase base = Farm::TimeBase::AgentStart) {
  return std::make_unique<Farm>(std::vector<AgentScript>{script}, std::vector<std::uint64_t>{seed}, base);
}

// n agents on distinct ephemeral ports with per-agent seeds drawn from `seed`.
inline std::unique_ptr<Farm> spawn_farm(std::size_t n, AgentScript tmpl, std::uint64_t seed,
                                        Farm::TimeBase base = Farm::TimeBase::AgentStart) {
  if (n == 0) throw std::invalid_argument("farm needs at least one agent");
  tmpl.port = 0;
  std::mt19937_64 derive(seed);
  std::vector<std::uint64_t> seeds(n);
  for (auto& s : seeds) s = derive();
  return std::make_unique<Farm>(std::vector<AgentScript>(n, tmpl), seeds, base);
}

// The per-host variable set of the test cluster: temperatures, memory, disk
// I/O, network, filesystem space, load averages and host identity, every one
// served as a number.
inline AgentScript table1_script() {
  AgentScript s;
  auto add = [&](std::string id, std::string_view oid, Generator g) {
    s.variables.push_back({std::move(id), snmp::parse_oid(oid), g});
  };
  const std::string temp = "1.3.6.1.4.1.2021.13.16.2.1.3.";
  add("tempBoard", temp + "1", Sine{38000, 2000, 900});
  add("tempCpu1", temp + "2", Sine{52000, 6000, 600});
  add("tempCpu2", temp + "3", Sine{51000, 6000, 600});
  const std::string mem = "1.3.6.1.4.1.2021.4.";
  add("freeMem", mem + "6.0", Sine{97824, 20000, 1200});
  add("sharedMem", mem + "13.0", Constant{0});
  add("bufferMem", mem + "14.0", Sine{14600, 1000, 1800});
  add("cachedMem", mem + "15.0", Sine{35376, 5000, 1800});
  add("totalMem", mem + "5.0", Constant{261724});
  add("totalSwap", mem + "3.0", Constant{530104});
  add("availSwap", mem + "4.0", Sine{500000, 20000, 3600});
  const std::string dio = "1.3.6.1.4.1.2021.13.15.1.1.";
  add("diskRead", dio + "3.7", Counter{40000, 32});
  add("diskWritten", dio + "4.7", Counter{25000, 32});
  for (int d = 1; d <= 5; ++d) add("disk" + std::to_string(d) + "Read", dio + "3." + std::to_string(d), Counter{8000, 32});
  for (int d = 1; d <= 6; ++d) {
    add("disk" + std::to_string(d) + "Written", dio + "4." + std::to_string(d), Counter{4000, 32});
  }
  const std::string ifs = "1.3.6.1.2.1.2.2.1.";
  for (int n = 1; n <= 4; ++n) add("net" + std::to_string(n) + "In", ifs + "10." + std::to_string(n), Counter{120000, 32});
  for (int n = 1; n <= 4; ++n) add("net" + std::to_string(n) + "Out", ifs + "16." + std::to_string(n), Counter{90000, 32});
  const std::string dsk = "1.3.6.1.4.1.2021.9.1.";
  const char* mounts[] = {"tmp", "var", "usr"};
  for (int m = 0; m < 3; ++m) {
    add(std::string(mounts[m]) + "Used", dsk + "8." + std::to_string(m + 1), Ramp{0.5});
    add(std::string(mounts[m]) + "Avail", dsk + "7." + std::to_string(m + 1), Sine{2000000, 1000, 86400});
  }
  const std::string la = "1.3.6.1.4.1.2021.10.1.5.";
  add("load1", la + "1", Sine{150, 100, 300});
  add("load5", la + "2", Sine{140, 60, 900});
  add("load10", la + "3", Sine{130, 40, 1800});
  add("hostId", "1.3.6.1.2.1.1.2.0", Constant{2021});
  add("hostName", "1.3.6.1.2.1.1.5.0", Constant{2});
  add("hostLocation", "1.3.6.1.2.1.1.6.0", Constant{1});
  add("uptime", "1.3.6.1.2.1.1.3.0", Counter{100, 32});
  return s;
}

}  // namespace farmwatch::sim
