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

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace farmwatch::snmp {

class OidError : public std::runtime_error {
 public:
  enum class Kind { UnknownName, BadArc };

  OidError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Object identifier. Arcs are 32-bit unsigned as in SNMP SMIv2.
class Oid {
 public:
  Oid() = default;

  explicit Oid(std::vector<std::uint32_t> arcs) : arcs_(std::move(arcs)) {
    if (!valid(arcs_)) {
      throw OidError(OidError::Kind::BadArc, "invalid object identifier " + to_string(arcs_));
    }
  }

  Oid(std::initializer_list<std::uint32_t> arcs) : Oid(std::vector<std::uint32_t>(arcs)) {}

  static bool valid(const std::vector<std::uint32_t>& arcs) {
    if (arcs.size() < 2 || arcs[0] > 2) return false;
    return arcs[0] == 2 || arcs[1] < 40;
  }

  const std::vector<std::uint32_t>& arcs() const noexcept { return arcs_; }
  std::size_t size() const noexcept { return arcs_.size(); }
  bool empty() const noexcept { return arcs_.empty(); }

  bool starts_with(const Oid& prefix) const {
    return prefix.arcs_.size() <= arcs_.size() &&
           std::equal(prefix.arcs_.begin(), prefix.arcs_.end(), arcs_.begin());
  }

  // Dotted decimal with a leading dot, the net-snmp convention.
  std::string str() const { return to_string(arcs_); }

  friend bool operator==(const Oid&, const Oid&) = default;
  friend auto operator<=>(const Oid&, const Oid&) = default;

 private:
  static std::string to_string(const std::vector<std::uint32_t>& arcs) {
    std::string out;
    for (auto a : arcs) {
      out += '.';
      out += std::to_string(a);
    }
    return out;
  }

  std::vector<std::uint32_t> arcs_;
};

namespace detail {

// Standard MIB-II, HOST-RESOURCES and UCD-SNMP names. Only the names that
// show up in practice for host monitoring are compiled in.
inline const std::unordered_map<std::string_view, std::string_view>& symbol_table() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"iso", "1"},
      {"org", "1.3"},
      {"dod", "1.3.6"},
      {"internet", "1.3.6.1"},
      {"mgmt", "1.3.6.1.2"},
      {"mib-2", "1.3.6.1.2.1"},
      {"private", "1.3.6.1.4"},
      {"enterprises", "1.3.6.1.4.1"},
      // SNMPv2-MIB system group
      {"system", "1.3.6.1.2.1.1"},
      {"sysDescr", "1.3.6.1.2.1.1.1"},
      {"sysObjectID", "1.3.6.1.2.1.1.2"},
      {"sysUpTime", "1.3.6.1.2.1.1.3"},
      {"sysContact", "1.3.6.1.2.1.1.4"},
      {"sysName", "1.3.6.1.2.1.1.5"},
      {"sysLocation", "1.3.6.1.2.1.1.6"},
      {"sysServices", "1.3.6.1.2.1.1.7"},
      // IF-MIB
      {"interfaces", "1.3.6.1.2.1.2"},
      {"ifNumber", "1.3.6.1.2.1.2.1"},
      {"ifTable", "1.3.6.1.2.1.2.2"},
      {"ifEntry", "1.3.6.1.2.1.2.2.1"},
      {"ifIndex", "1.3.6.1.2.1.2.2.1.1"},
      {"ifDescr", "1.3.6.1.2.1.2.2.1.2"},
      {"ifSpeed", "1.3.6.1.2.1.2.2.1.5"},
      {"ifInOctets", "1.3.6.1.2.1.2.2.1.10"},
      {"ifInUcastPkts", "1.3.6.1.2.1.2.2.1.11"},
      {"ifInErrors", "1.3.6.1.2.1.2.2.1.14"},
      {"ifOutOctets", "1.3.6.1.2.1.2.2.1.16"},
      {"ifOutUcastPkts", "1.3.6.1.2.1.2.2.1.17"},
      {"ifOutErrors", "1.3.6.1.2.1.2.2.1.20"},
      // HOST-RESOURCES-MIB
      {"host", "1.3.6.1.2.1.25"},
      {"hrSystem", "1.3.6.1.2.1.25.1"},
      {"hrSystemUptime", "1.3.6.1.2.1.25.1.1"},
      {"hrSystemNumUsers", "1.3.6.1.2.1.25.1.5"},
      {"hrSystemProcesses", "1.3.6.1.2.1.25.1.6"},
      {"hrStorage", "1.3.6.1.2.1.25.2"},
      {"hrMemorySize", "1.3.6.1.2.1.25.2.2"},
      {"hrStorageTable", "1.3.6.1.2.1.25.2.3"},
      {"hrStorageEntry", "1.3.6.1.2.1.25.2.3.1"},
      {"hrStorageIndex", "1.3.6.1.2.1.25.2.3.1.1"},
      {"hrStorageDescr", "1.3.6.1.2.1.25.2.3.1.3"},
      {"hrStorageAllocationUnits", "1.3.6.1.2.1.25.2.3.1.4"},
      {"hrStorageSize", "1.3.6.1.2.1.25.2.3.1.5"},
      {"hrStorageUsed", "1.3.6.1.2.1.25.2.3.1.6"},
      {"hrProcessorLoad", "1.3.6.1.2.1.25.3.3.1.2"},
      // UCD-SNMP-MIB
      {"ucdavis", "1.3.6.1.4.1.2021"},
      {"memory", "1.3.6.1.4.1.2021.4"},
      {"memTotalSwap", "1.3.6.1.4.1.2021.4.3"},
      {"memAvailSwap", "1.3.6.1.4.1.2021.4.4"},
      {"memTotalReal", "1.3.6.1.4.1.2021.4.5"},
      {"memAvailReal", "1.3.6.1.4.1.2021.4.6"},
      {"memTotalFree", "1.3.6.1.4.1.2021.4.11"},
      {"memShared", "1.3.6.1.4.1.2021.4.13"},
      {"memBuffer", "1.3.6.1.4.1.2021.4.14"},
      {"memCached", "1.3.6.1.4.1.2021.4.15"},
      {"dskTable", "1.3.6.1.4.1.2021.9"},
      {"dskEntry", "1.3.6.1.4.1.2021.9.1"},
      {"dskPath", "1.3.6.1.4.1.2021.9.1.2"},
      {"dskTotal", "1.3.6.1.4.1.2021.9.1.6"},
      {"dskAvail", "1.3.6.1.4.1.2021.9.1.7"},
      {"dskUsed", "1.3.6.1.4.1.2021.9.1.8"},
      {"laTable", "1.3.6.1.4.1.2021.10"},
      {"laEntry", "1.3.6.1.4.1.2021.10.1"},
      {"laLoad", "1.3.6.1.4.1.2021.10.1.3"},
      {"laLoadInt", "1.3.6.1.4.1.2021.10.1.5"},
      {"ssCpuRawUser", "1.3.6.1.4.1.2021.11.50"},
      {"ssCpuRawSystem", "1.3.6.1.4.1.2021.11.52"},
      {"ssCpuRawIdle", "1.3.6.1.4.1.2021.11.53"},
      // UCD-DISKIO-MIB and LM-SENSORS-MIB
      {"diskIOTable", "1.3.6.1.4.1.2021.13.15.1"},
      {"diskIOEntry", "1.3.6.1.4.1.2021.13.15.1.1"},
      {"diskIONRead", "1.3.6.1.4.1.2021.13.15.1.1.3"},
      {"diskIONWritten", "1.3.6.1.4.1.2021.13.15.1.1.4"},
      {"diskIOReads", "1.3.6.1.4.1.2021.13.15.1.1.5"},
      {"diskIOWrites", "1.3.6.1.4.1.2021.13.15.1.1.6"},
      {"lmTempSensorsTable", "1.3.6.1.4.1.2021.13.16.2"},
      {"lmTempSensorsEntry", "1.3.6.1.4.1.2021.13.16.2.1"},
      {"lmTempSensorsValue", "1.3.6.1.4.1.2021.13.16.2.1.3"},
  };
  return table;
}

inline bool parse_arc(std::string_view s, std::uint32_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

inline std::vector<std::string_view> split_dots(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto dot = text.find('.', pos);
    out.push_back(text.substr(pos, dot == std::string_view::npos ? text.npos : dot - pos));
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return out;
}

inline std::vector<std::uint32_t> numeric_arcs(std::string_view dotted) {
  std::vector<std::uint32_t> arcs;
  for (auto seg : split_dots(dotted)) {
    std::uint32_t a = 0;
    parse_arc(seg, a);
    arcs.push_back(a);
  }
  return arcs;
}

}  // namespace detail

// Parses dotted-decimal (".1.3.6.1.2.1.1.3.0") or symbolic
// ("system.sysUpTime.0", "IF-MIB::ifInOctets.2") notation.
inline Oid parse_oid(std::string_view text) {
  using Kind = OidError::Kind;
  if (text.empty()) throw OidError(Kind::BadArc, "empty object identifier");

  if (auto colons = text.rfind("::"); colons != std::string_view::npos) text = text.substr(colons + 2);
  if (!text.empty() && text.front() == '.') text.remove_prefix(1);
  if (text.empty()) throw OidError(Kind::BadArc, "empty object identifier");

  auto segs = detail::split_dots(text);

  // Locate the last symbolic segment; everything after it is an instance suffix.
  std::ptrdiff_t last_symbolic = -1;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    std::uint32_t tmp = 0;
    if (segs[i].empty()) throw OidError(Kind::BadArc, "empty arc in '" + std::string(text) + "'");
    if (!detail::parse_arc(segs[i], tmp)) last_symbolic = static_cast<std::ptrdiff_t>(i);
  }

  std::vector<std::uint32_t> arcs;
  if (last_symbolic < 0) {
    for (auto seg : segs) {
      std::uint32_t a = 0;
      if (!detail::parse_arc(seg, a)) throw OidError(Kind::BadArc, "bad arc '" + std::string(seg) + "'");
      arcs.push_back(a);
    }
  } else {
    const auto& table = detail::symbol_table();
    for (std::ptrdiff_t i = 0; i <= last_symbolic; ++i) {
      auto it = table.find(segs[i]);
      if (it == table.end()) {
        std::uint32_t tmp = 0;
        if (detail::parse_arc(segs[i], tmp)) {
          throw OidError(Kind::BadArc, "numeric arc before symbolic name in '" + std::string(text) + "'");
        }
        throw OidError(Kind::UnknownName, "unknown MIB name '" + std::string(segs[i]) + "'");
      }
    }
    arcs = detail::numeric_arcs(table.at(segs[last_symbolic]));
    // Leading names must be ancestors of the resolved name.
    for (std::ptrdiff_t i = 0; i < last_symbolic; ++i) {
      auto parent = detail::numeric_arcs(table.at(segs[i]));
      if (parent.size() > arcs.size() || !std::equal(parent.begin(), parent.end(), arcs.begin())) {
        throw OidError(Kind::UnknownName, "'" + std::string(segs[last_symbolic]) + "' is not under '" +
                                              std::string(segs[i]) + "'");
      }
    }
    for (std::size_t i = last_symbolic + 1; i < segs.size(); ++i) {
      std::uint32_t a = 0;
      detail::parse_arc(segs[i], a);
      arcs.push_back(a);
    }
  }
  if (!Oid::valid(arcs)) throw OidError(Kind::BadArc, "invalid object identifier '" + std::string(text) + "'");
  return Oid(std::move(arcs));
}

}  // namespace farmwatch::snmp
