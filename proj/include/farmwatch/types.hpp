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

#include <cstdint>
#include <string_view>

namespace farmwatch {

// How a raw SNMP reading becomes a stored value.
enum class VarKind : std::uint8_t { Gauge, Derive, Counter };

enum class ConsolidationFn : std::uint8_t { Average, Min, Max, Last };

inline std::string_view to_string(VarKind k) {
  switch (k) {
    case VarKind::Gauge: return "GAUGE";
    case VarKind::Derive: return "DERIVE";
    case VarKind::Counter: return "COUNTER";
  }
  return "?";
}

inline std::string_view to_string(ConsolidationFn cf) {
  switch (cf) {
    case ConsolidationFn::Average: return "AVERAGE";
    case ConsolidationFn::Min: return "MIN";
    case ConsolidationFn::Max: return "MAX";
    case ConsolidationFn::Last: return "LAST";
  }
  return "?";
}

// Wall-clock instant as (possibly fractional) seconds since the Unix epoch.
using Timestamp = double;

}  // namespace farmwatch
