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

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "farmwatch/config.hpp"
#include "farmwatch/net.hpp"
#include "farmwatch/snmp/message.hpp"
#include "farmwatch/types.hpp"

namespace farmwatch {

struct VarState {
  std::optional<std::uint64_t> last_raw;
  std::optional<Timestamp> last_time;
  std::optional<double> last_processed;
};

// Turns one raw reading into the stored value per the variable's kind.
// Returns nullopt for the first COUNTER/DERIVE sample and for results
// outside the configured [min, max].
inline std::optional<double> process_value(const MibSpec& spec, std::uint64_t raw, VarState& state, Timestamp now) {
  std::optional<double> out;
  if (spec.kind == VarKind::Gauge) {
    out = static_cast<double>(raw);
  } else if (state.last_raw && state.last_time && now > *state.last_time) {
    const double dt = now - *state.last_time;
    const std::uint64_t last = *state.last_raw;
    if (spec.kind == VarKind::Counter) {
      std::uint64_t delta = 0;
      if (raw >= last) {
        delta = raw - last;
      } else if (last <= 0xFFFFFFFFull) {
        delta = (std::uint64_t{1} << 32) - last + raw;
      } else {
        delta = raw - last;  // modulo 2^64
      }
      out = static_cast<double>(delta) / dt;
    } else {
      auto diff = static_cast<__int128>(raw) - static_cast<__int128>(last);
      out = static_cast<double>(diff) / dt;
    }
  }
  if (out && ((spec.min && *out < *spec.min) || (spec.max && *out > *spec.max))) out.reset();
  state.last_raw = raw;
  state.last_time = now;
  state.last_processed = out;
  return out;
}

struct VarError {
  std::string code;  // e.g. "noSuchObject", "noSuchName", "BadType", "Timeout"
  std::string message;
  friend bool operator==(const VarError&, const VarError&) = default;
};

using VarOutcome = std::variant<std::uint64_t, VarError>;

struct PollResult {
  enum class Outcome { Responded, Timeout };
  std::string host;
  Timestamp time = 0;
  Outcome outcome = Outcome::Responded;
  std::map<std::string, VarOutcome> values;  // mib id -> raw reading or error
};

// Maps one response value to a raw reading, or explains why it cannot.
inline VarOutcome raw_reading(const snmp::Value& v) {
  using namespace snmp;
  if (auto* c = std::get_if<Counter32>(&v)) return std::uint64_t{c->value};
  if (auto* g = std::get_if<Gauge32>(&v)) return std::uint64_t{g->value};
  if (auto* t = std::get_if<TimeTicks>(&v)) return std::uint64_t{t->value};
  if (auto* c = std::get_if<Counter64>(&v)) return c->value;
  if (auto* i = std::get_if<Integer>(&v)) {
    if (i->value >= 0) return static_cast<std::uint64_t>(i->value);
    return VarError{"BadType", "negative INTEGER " + std::to_string(i->value)};
  }
  if (std::holds_alternative<NoSuchObject>(v)) return VarError{"noSuchObject", "no such object"};
  if (std::holds_alternative<NoSuchInstance>(v)) return VarError{"noSuchInstance", "no such instance"};
  if (std::holds_alternative<EndOfMibView>(v)) return VarError{"endOfMibView", "end of MIB view"};
  if (std::holds_alternative<OctetString>(v)) return VarError{"BadType", "OCTET STRING is not numeric"};
  return VarError{"BadType", "value is not numeric"};
}

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() = 0;
};

class SystemClock : public Clock {
 public:
  Timestamp now() override {
    return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
  }
};

struct Datagram {
  net::Endpoint from;
  std::vector<std::uint8_t> data;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(const net::Endpoint& to, std::span<const std::uint8_t> data) = 0;
  // Blocks up to `timeout` seconds for one datagram.
  virtual std::optional<Datagram> receive(double timeout) = 0;
};

class UdpTransport : public Transport {
 public:
  UdpTransport() : sock_(net::UdpSocket::bind(0)) {}

  void send(const net::Endpoint& to, std::span<const std::uint8_t> data) override { sock_.send_to(to, data); }

  std::optional<Datagram> receive(double timeout) override {
    Datagram d;
    if (sock_.recv_from(d.data, d.from)) return d;
    if (!sock_.wait_readable(timeout)) return std::nullopt;
    if (sock_.recv_from(d.data, d.from)) return d;
    return std::nullopt;
  }

 private:
  net::UdpSocket sock_;
};

struct CollectorOptions {
  double timeout = 5.0;
  int retries = 1;
  std::uint16_t default_port = 161;
};

// Trace of what the collector does, for instrumentation and tests.
struct CollectorEvent {
  enum class Kind { PollStart, PollEnd, Send, Receive, MissedCycle };
  Kind kind;
  Timestamp time = 0;
  std::size_t host = 0;
  std::size_t in_flight = 0;
  std::size_t bytes = 0;
  Timestamp scheduled = 0;  // PollStart: the cycle this poll serves
};

struct CollectorStats {
  std::atomic<std::uint64_t> requests_sent{0};
  std::atomic<std::uint64_t> request_bytes{0};
  std::atomic<std::uint64_t> responses_received{0};
  std::atomic<std::uint64_t> response_bytes{0};
  std::atomic<std::uint64_t> unknown_responses{0};
  std::atomic<std::uint64_t> malformed_responses{0};
  std::atomic<std::uint64_t> polls_completed{0};
  std::atomic<std::uint64_t> timeouts{0};
  std::atomic<std::uint64_t> missed_cycles{0};
  std::atomic<std::size_t> max_in_flight{0};
};

using ProcessedValues = std::map<std::string, std::optional<double>>;

// Single-threaded polling loop. Each host with at least one variable is
// polled every polldelay seconds on a grid anchored at the first poll; when
// more than num_connections exchanges would be in flight, due hosts wait in
// earliest-deadline order.
class Collector {
 public:
  using ResultSink = std::function<void(std::size_t host, const PollResult&, const ProcessedValues&)>;
  using EventSink = std::function<void(const CollectorEvent&)>;

  Collector(const MonitorConfig& cfg, Clock& clock, Transport& transport, CollectorOptions opts, ResultSink sink)
      : cfg_(cfg), clock_(clock), transport_(transport), opts_(opts), sink_(std::move(sink)) {
    hosts_.resize(cfg_.hosts.size());
    for (std::size_t h = 0; h < cfg_.hosts.size(); ++h) {
      const auto& hc = cfg_.hosts[h];
      auto& hs = hosts_[h];
      hs.vars.resize(hc.mibs.size());
      hs.endpoint = net::resolve(hc.ip, opts_.default_port);
      if (!hs.endpoint) spdlog::warn("host {}: cannot resolve '{}'", hc.name, hc.ip);
    }
  }

  void on_event(EventSink sink) { events_ = std::move(sink); }
  const CollectorStats& stats() const noexcept { return stats_; }
  std::size_t in_flight() const noexcept { return in_flight_; }

  // Polls until `keep_going` returns false.
  void run(const std::function<bool()>& keep_going) {
    start();
    while (keep_going()) step(0.25);
  }

  // Arms every pollable host for an immediate first poll.
  void start() {
    const Timestamp now = clock_.now();
    for (std::size_t h = 0; h < hosts_.size(); ++h) {
      if (cfg_.hosts[h].mibs.empty()) continue;
      hosts_[h].next_due = now;
      hosts_[h].armed = true;
    }
    started_ = true;
  }

  // One loop iteration, waiting at most `max_wait` seconds for input.
  void step(double max_wait) {
    if (!started_) start();
    Timestamp now = clock_.now();
    schedule_due(now);
    dispatch(now);
    expire(now);
    dispatch(now);

    double wait = max_wait;
    for (const auto& [id, ex] : exchanges_) wait = std::min(wait, ex.deadline - now);
    for (const auto& hs : hosts_) {
      if (hs.armed && !hs.busy) wait = std::min(wait, hs.next_due - now);
    }
    wait = std::max(wait, 0.0);
    if (auto d = transport_.receive(wait)) {
      handle(*d);
      // Drain whatever else is already queued.
      while (auto more = transport_.receive(0)) handle(*more);
    }
  }

 private:
  struct Exchange {
    std::size_t host = 0;
    std::int32_t request_id = 0;
    std::string community;
    std::vector<std::size_t> mibs;  // indices into the host's miblist
    snmp::Bytes request;
    Timestamp deadline = 0;
    int attempts = 0;
  };

  struct HostState {
    std::optional<net::Endpoint> endpoint;
    std::vector<VarState> vars;
    Timestamp next_due = 0;
    bool armed = false;
    bool busy = false;  // queued or in flight
    bool any_response = false;
    std::size_t open = 0;  // outstanding exchanges
    PollResult result;
  };

  struct Queued {
    Timestamp deadline;
    std::uint64_t seq;
    std::size_t host;
    bool operator>(const Queued& o) const { return deadline != o.deadline ? deadline > o.deadline : seq > o.seq; }
  };

  void emit(CollectorEvent::Kind kind, Timestamp t, std::size_t host, std::size_t bytes = 0, Timestamp sched = 0) {
    if (events_) events_({kind, t, host, in_flight_, bytes, sched});
  }

  void schedule_due(Timestamp now) {
    for (std::size_t h = 0; h < hosts_.size(); ++h) {
      auto& hs = hosts_[h];
      if (!hs.armed || hs.busy || hs.next_due > now) continue;
      const auto pd = static_cast<double>(cfg_.hosts[h].polldelay);
      Timestamp slot = hs.next_due;
      // More than a full period late: skip to the latest grid slot.
      if (now - slot >= pd) {
        auto skipped = static_cast<std::uint64_t>(std::floor((now - slot) / pd));
        slot += static_cast<double>(skipped) * pd;
        stats_.missed_cycles += skipped;
        for (std::uint64_t i = 0; i < skipped; ++i) emit(CollectorEvent::Kind::MissedCycle, now, h);
      }
      hs.next_due = slot + pd;
      hs.busy = true;
      queue_.push({slot, seq_++, h});
    }
  }

  void dispatch(Timestamp now) {
    const auto cap = static_cast<std::size_t>(std::max(1, cfg_.num_connections));
    while (!queue_.empty() && in_flight_ < cap) {
      auto q = queue_.top();
      queue_.pop();
      begin_poll(q.host, now, q.deadline);
    }
  }

  std::int32_t next_request_id() {
    if (request_id_ == INT32_MAX) request_id_ = 0;
    return ++request_id_;
  }

  void begin_poll(std::size_t h, Timestamp now, Timestamp scheduled) {
    auto& hs = hosts_[h];
    const auto& hc = cfg_.hosts[h];
    hs.result = PollResult{hc.name, now, PollResult::Outcome::Responded, {}};
    ++in_flight_;
    stats_.max_in_flight = std::max(stats_.max_in_flight.load(), in_flight_);
    emit(CollectorEvent::Kind::PollStart, now, h, 0, scheduled);

    if (!hs.endpoint) {
      finish_poll(h, now);
      return;
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t m = 0; m < hc.mibs.size(); ++m) groups[hc.mibs[m].community].push_back(m);
    for (auto& [community, mibs] : groups) open_exchange(h, community, std::move(mibs), now);
    if (hs.open == 0) finish_poll(h, now);
  }

  void open_exchange(std::size_t h, const std::string& community, std::vector<std::size_t> mibs, Timestamp now) {
    const auto& hc = cfg_.hosts[h];
    Exchange ex;
    ex.host = h;
    ex.community = community;
    ex.request_id = next_request_id();
    ex.mibs = std::move(mibs);
    std::vector<snmp::Oid> oids;
    for (auto m : ex.mibs) oids.push_back(hc.mibs[m].oid);
    try {
      ex.request = snmp::encode_get_request(hc.snmp_version, community, ex.request_id, oids);
    } catch (const std::exception& e) {
      spdlog::error("host {}: cannot encode request: {}", hc.name, e.what());
      for (auto m : ex.mibs) hosts_[h].result.values[hc.mibs[m].id] = VarError{"TooLarge", e.what()};
      return;
    }
    ++hosts_[h].open;
    send(ex, now);
    exchanges_.emplace(ex.request_id, std::move(ex));
  }

  void send(Exchange& ex, Timestamp now) {
    ++ex.attempts;
    ex.deadline = now + opts_.timeout;
    transport_.send(*hosts_[ex.host].endpoint, ex.request);
    ++stats_.requests_sent;
    stats_.request_bytes += ex.request.size();
    emit(CollectorEvent::Kind::Send, now, ex.host, ex.request.size());
  }

  void expire(Timestamp now) {
    std::vector<std::int32_t> dead;
    for (auto& [id, ex] : exchanges_) {
      if (ex.deadline > now) continue;
      if (ex.attempts <= opts_.retries) {
        spdlog::debug("host {}: retry {} of request {}", cfg_.hosts[ex.host].name, ex.attempts, id);
        send(ex, now);
      } else {
        dead.push_back(id);
      }
    }
    for (auto id : dead) {
      auto node = exchanges_.extract(id);
      auto& ex = node.mapped();
      auto& hs = hosts_[ex.host];
      for (auto m : ex.mibs) hs.result.values[cfg_.hosts[ex.host].mibs[m].id] = VarError{"Timeout", "no response"};
      close_exchange(ex.host, now);
    }
  }

  void handle(const Datagram& d) {
    const Timestamp now = clock_.now();
    ++stats_.responses_received;
    stats_.response_bytes += d.data.size();
    snmp::SnmpMessage msg;
    try {
      msg = snmp::decode_message(d.data);
    } catch (const snmp::DecodeError& e) {
      ++stats_.malformed_responses;
      spdlog::debug("dropping malformed datagram from {}: {}", d.from.str(), e.what());
      return;
    }
    auto it = exchanges_.find(msg.request_id);
    if (it == exchanges_.end() || msg.pdu_type != snmp::PduType::Response ||
        !(hosts_[it->second.host].endpoint == d.from) || msg.community != it->second.community) {
      ++stats_.unknown_responses;
      return;
    }
    auto node = exchanges_.extract(it);
    Exchange& ex = node.mapped();
    const std::size_t h = ex.host;
    emit(CollectorEvent::Kind::Receive, now, h, d.data.size());
    const auto& hc = cfg_.hosts[h];
    auto& values = hosts_[h].result.values;
    hosts_[h].any_response = true;

    if (msg.error_status != 0) {
      const char* name = snmp::error_status_name(msg.error_status);
      const auto idx = msg.error_index;
      if (idx >= 1 && static_cast<std::size_t>(idx) <= ex.mibs.size()) {
        auto bad = ex.mibs[static_cast<std::size_t>(idx - 1)];
        values[hc.mibs[bad].id] = VarError{name, "agent reported " + std::string(name)};
        std::vector<std::size_t> rest;
        for (auto m : ex.mibs) {
          if (m != bad) rest.push_back(m);
        }
        if (!rest.empty()) open_exchange(h, ex.community, std::move(rest), now);
      } else {
        for (auto m : ex.mibs) values[hc.mibs[m].id] = VarError{name, "agent reported " + std::string(name)};
      }
      close_exchange(h, now);
      return;
    }
    for (std::size_t i = 0; i < ex.mibs.size(); ++i) {
      const auto& mib = hc.mibs[ex.mibs[i]];
      const snmp::VarBind* vb = nullptr;
      if (i < msg.varbinds.size() && msg.varbinds[i].oid == mib.oid) {
        vb = &msg.varbinds[i];
      } else {
        for (const auto& cand : msg.varbinds) {
          if (cand.oid == mib.oid) vb = &cand;
        }
      }
      values[mib.id] = vb ? raw_reading(vb->value) : VarOutcome{VarError{"Missing", "variable absent from response"}};
    }
    close_exchange(h, now);
  }

  void close_exchange(std::size_t h, Timestamp now) {
    if (--hosts_[h].open == 0) finish_poll(h, now);
  }

  void finish_poll(std::size_t h, Timestamp now) {
    auto& hs = hosts_[h];
    const auto& hc = cfg_.hosts[h];
    PollResult result = std::move(hs.result);
    result.time = now;
    if (!hs.any_response) {
      result.outcome = PollResult::Outcome::Timeout;
      result.values.clear();
      ++stats_.timeouts;
    }
    ProcessedValues processed;
    for (std::size_t m = 0; m < hc.mibs.size(); ++m) {
      auto it = result.values.find(hc.mibs[m].id);
      if (it == result.values.end()) continue;
      if (auto* raw = std::get_if<std::uint64_t>(&it->second)) {
        processed[hc.mibs[m].id] = process_value(hc.mibs[m], *raw, hs.vars[m], now);
      } else {
        processed[hc.mibs[m].id] = std::nullopt;
      }
    }
    hs.busy = false;
    hs.any_response = false;
    --in_flight_;
    ++stats_.polls_completed;
    emit(CollectorEvent::Kind::PollEnd, now, h);
    if (sink_) sink_(h, result, processed);
  }

  const MonitorConfig& cfg_;
  Clock& clock_;
  Transport& transport_;
  CollectorOptions opts_;
  ResultSink sink_;
  EventSink events_;
  CollectorStats stats_;
  std::vector<HostState> hosts_;
  std::unordered_map<std::int32_t, Exchange> exchanges_;
  std::priority_queue<Queued, std::vector<Queued>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  std::int32_t request_id_ = 0;
  std::size_t in_flight_ = 0;
  bool started_ = false;
};

}  // namespace farmwatch
