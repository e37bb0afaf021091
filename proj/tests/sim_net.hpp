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

#include <arpa/inet.h>

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "farmwatch/agent_sim.hpp"
#include "farmwatch/collector.hpp"

namespace farmwatch::testing {

class SimClock : public Clock {
 public:
  explicit SimClock(Timestamp t) : t_(t) {}
  Timestamp now() override { return t_; }
  void set(Timestamp t) { t_ = std::max(t_, t); }
  void advance(double dt) { t_ += dt; }

 private:
  Timestamp t_;
};

// Discrete-event network: agents answer instantly in simulated time and the
// reply is delivered `latency` seconds later. receive() advances the clock.
class SimNet : public Transport {
 public:
  struct Sent {
    Timestamp time;
    net::Endpoint to;
    snmp::Bytes data;
  };

  SimNet(SimClock& clock, double latency) : clock_(clock), latency_(latency) {}

  void attach(std::uint16_t port, sim::AgentLogic& agent) { agents_[port] = &agent; }
  void set_latency(std::uint16_t port, double latency) { latency_for_[port] = latency; }

  static net::Endpoint endpoint(std::uint16_t port) { return {htonl(INADDR_LOOPBACK), port}; }

  void inject(Timestamp at, net::Endpoint from, snmp::Bytes data) {
    inbox_.emplace(at, Datagram{from, std::move(data)});
  }

  void send(const net::Endpoint& to, std::span<const std::uint8_t> data) override {
    sent.push_back({clock_.now(), to, snmp::Bytes(data.begin(), data.end())});
    auto it = agents_.find(to.port);
    if (it == agents_.end()) return;
    auto reply = it->second->respond(data, clock_.now());
    if (!reply) return;
    auto lat = latency_for_.count(to.port) ? latency_for_[to.port] : latency_;
    inbox_.emplace(clock_.now() + lat, Datagram{to, std::move(*reply)});
  }

  std::optional<Datagram> receive(double timeout) override {
    if (!inbox_.empty() && inbox_.begin()->first <= clock_.now() + timeout) {
      auto node = inbox_.extract(inbox_.begin());
      clock_.set(node.key());
      return std::move(node.mapped());
    }
    clock_.advance(timeout);
    return std::nullopt;
  }

  std::vector<Sent> sent;

 private:
  SimClock& clock_;
  double latency_;
  std::map<std::uint16_t, double> latency_for_;
  std::map<std::uint16_t, sim::AgentLogic*> agents_;
  std::multimap<Timestamp, Datagram> inbox_;
};

inline HostConfig sim_host(const std::string& name, std::uint16_t port, const sim::AgentScript& script,
                           std::int64_t polldelay) {
  HostConfig h;
  h.name = name;
  h.ip = "127.0.0.1:" + std::to_string(port);
  h.polldelay = polldelay;
  for (const auto& v : script.variables) {
    MibSpec m;
    m.id = v.id;
    m.name = v.oid.str();
    m.oid = v.oid;
    m.kind = std::holds_alternative<sim::Counter>(v.gen) ? VarKind::Counter : VarKind::Gauge;
    m.community = script.community;
    h.mibs.push_back(std::move(m));
  }
  h.rras.push_back({ConsolidationFn::Average, 0.8, polldelay, polldelay * 100});
  return h;
}

}  // namespace farmwatch::testing
