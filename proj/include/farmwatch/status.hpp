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

#include <charconv>
#include <cmath>
#include <ctime>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "farmwatch/collector.hpp"
#include "farmwatch/config.hpp"
#include "farmwatch/xml.hpp"

namespace farmwatch {

enum class HostState { Unknown, Ok, Timeout };
enum class Severity { Info, Warning, Critical };

inline const char* to_string(HostState s) {
  switch (s) {
    case HostState::Unknown: return "UNKNOWN";
    case HostState::Ok: return "OK";
    case HostState::Timeout: return "TIMEOUT";
  }
  return "UNKNOWN";
}

inline const char* to_string(Severity s) {
  switch (s) {
    case Severity::Info: return "INFO";
    case Severity::Warning: return "WARNING";
    case Severity::Critical: return "CRITICAL";
  }
  return "INFO";
}

struct Notification {
  Timestamp ts = 0;
  Severity severity = Severity::Info;
  std::string message;
  friend bool operator==(const Notification&, const Notification&) = default;
};

struct MibReading {
  double value = 0;
  std::int64_t last_updated = 0;
  friend bool operator==(const MibReading&, const MibReading&) = default;
};

struct HostStatus {
  static constexpr std::size_t kMaxNotifications = 100;

  std::string name;
  std::vector<std::string> tags;
  HostState state = HostState::Unknown;
  std::vector<std::pair<std::string, std::optional<MibReading>>> values;  // config order
  std::vector<std::pair<std::string, std::string>> graphs;                // (id, title)
  std::deque<Notification> notifications;                                 // oldest first

  void notify(Notification n) {
    notifications.push_back(std::move(n));
    while (notifications.size() > kMaxNotifications) notifications.pop_front();
  }

  friend bool operator==(const HostStatus&, const HostStatus&) = default;
};

struct ClusterStatus {
  std::vector<std::shared_ptr<const HostStatus>> hosts;

  const HostStatus* find(std::string_view name) const {
    for (const auto& h : hosts) {
      if (h->name == name) return h.get();
    }
    return nullptr;
  }

  friend bool operator==(const ClusterStatus& a, const ClusterStatus& b) {
    if (a.hosts.size() != b.hosts.size()) return false;
    for (std::size_t i = 0; i < a.hosts.size(); ++i) {
      if (!(*a.hosts[i] == *b.hosts[i])) return false;
    }
    return true;
  }
};

class UnknownHost : public std::out_of_range {
 public:
  explicit UnknownHost(const std::string& name) : std::out_of_range("unknown host '" + name + "'") {}
};

// The in-memory cluster view. One writer applies poll results; readers take
// snapshots at any time. Each apply publishes a fresh immutable ClusterStatus
// that shares every untouched host entry with the previous one.
class StatusView {
 public:
  explicit StatusView(const MonitorConfig& cfg) {
    auto cluster = std::make_shared<ClusterStatus>();
    for (std::size_t i = 0; i < cfg.hosts.size(); ++i) {
      const auto& hc = cfg.hosts[i];
      auto hs = std::make_shared<HostStatus>();
      hs->name = hc.name;
      hs->tags = hc.tags;
      for (const auto& m : hc.mibs) hs->values.emplace_back(m.id, std::nullopt);
      for (const auto& g : hc.graphs) hs->graphs.emplace_back(g.id, g.title);
      cluster->hosts.push_back(std::move(hs));
      index_.emplace(hc.name, i);
    }
    current_ = std::move(cluster);
  }

  std::shared_ptr<const ClusterStatus> snapshot() const {
    std::lock_guard lock(mu_);
    return current_;
  }

  void apply_poll_result(const PollResult& result, const ProcessedValues& processed) {
    auto it = index_.find(result.host);
    if (it == index_.end()) throw UnknownHost(result.host);
    const std::size_t idx = it->second;
    auto base = snapshot();
    auto host = std::make_shared<HostStatus>(*base->hosts[idx]);

    if (result.outcome == PollResult::Outcome::Timeout) {
      host->state = HostState::Timeout;
      host->notify({result.time, Severity::Critical, "Timeout"});
    } else {
      host->state = HostState::Ok;
      const auto stamp = static_cast<std::int64_t>(std::floor(result.time));
      for (auto& [id, reading] : host->values) {
        auto p = processed.find(id);
        if (p != processed.end() && p->second) reading = MibReading{*p->second, stamp};
      }
      for (const auto& [id, outcome] : result.values) {
        if (const auto* err = std::get_if<VarError>(&outcome)) {
          host->notify({result.time, Severity::Warning, id + ": " + err->code + " (" + err->message + ")"});
        }
      }
    }
    publish(idx, std::move(host));
  }

  void notify(const std::string& host_name, Notification n) {
    auto it = index_.find(host_name);
    if (it == index_.end()) throw UnknownHost(host_name);
    auto host = std::make_shared<HostStatus>(*snapshot()->hosts[it->second]);
    host->notify(std::move(n));
    publish(it->second, std::move(host));
  }

 private:
  void publish(std::size_t idx, std::shared_ptr<const HostStatus> host) {
    std::lock_guard lock(mu_);
    auto next = std::make_shared<ClusterStatus>(*current_);
    next->hosts[idx] = std::move(host);
    current_ = std::move(next);
  }

  mutable std::mutex mu_;
  std::shared_ptr<const ClusterStatus> current_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Fixed six fractional digits, no exponent.
inline std::string format_value(double v) {
  char buf[400];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, p);
}

// "<epoch>.<usec> <HH:MM:SS>.<usec>" in local time.
inline std::string format_ts(Timestamp ts) {
  auto micros = static_cast<std::int64_t>(std::llround(ts * 1e6));
  std::int64_t secs = micros / 1'000'000;
  std::int64_t frac = micros % 1'000'000;
  if (frac < 0) {
    frac += 1'000'000;
    --secs;
  }
  std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  ::localtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%lld.%06lld %02d:%02d:%02d.%06lld", static_cast<long long>(secs),
                static_cast<long long>(frac), tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<long long>(frac));
  return buf;
}

namespace status_detail {

inline void write_host(std::string& out, const HostStatus& h) {
  using xml::escape_attr;
  using xml::escape_text;
  std::string tags;
  for (const auto& t : h.tags) tags += (tags.empty() ? "" : ",") + t;
  out += "  <host name=\"" + escape_attr(h.name) + "\" tag=\"" + escape_attr(tags) + "\" status=\"" +
         to_string(h.state) + "\">\n";

  bool any = false;
  for (const auto& [id, r] : h.values) any = any || r.has_value();
  if (!any) {
    out += "    <mibs/>\n";
  } else {
    out += "    <mibs>\n";
    for (const auto& [id, r] : h.values) {
      if (!r) continue;
      out += "      <mib id=\"" + escape_attr(id) + "\" lastUpdated=\"" + std::to_string(r->last_updated) + "\">" +
             format_value(r->value) + "</mib>\n";
    }
    out += "    </mibs>\n";
  }

  if (h.graphs.empty()) {
    out += "    <graphs/>\n";
  } else {
    out += "    <graphs>\n";
    for (const auto& [id, title] : h.graphs) {
      out += "      <graph id=\"" + escape_attr(id) + "\" title=\"" + escape_attr(title) + "\"/>\n";
    }
    out += "    </graphs>\n";
  }

  if (h.notifications.empty()) {
    out += "    <notifications/>\n";
  } else {
    out += "    <notifications>\n";
    for (const auto& n : h.notifications) {
      out += "      <msg ts=\"" + format_ts(n.ts) + "\" severity=\"" + to_string(n.severity) + "\">" +
             escape_text(n.message) + "</msg>\n";
    }
    out += "    </notifications>\n";
  }
  out += "  </host>\n";
}

}  // namespace status_detail

inline std::string serialize_status_xml(const ClusterStatus& cluster) {
  std::string out = "<?xml version=\"1.0\"?>\n";
  if (cluster.hosts.empty()) return out + "<hosts/>\n";
  out += "<hosts>\n";
  for (const auto& h : cluster.hosts) status_detail::write_host(out, *h);
  return out + "</hosts>\n";
}

// Single-host document: the same <hosts> root holding one entry.
inline std::string serialize_status_xml(const HostStatus& host) {
  std::string out = "<?xml version=\"1.0\"?>\n<hosts>\n";
  status_detail::write_host(out, host);
  return out + "</hosts>\n";
}

}  // namespace farmwatch
