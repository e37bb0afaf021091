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

// Random structurally-valid inputs for property tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "farmwatch/snmp/message.hpp"

namespace farmwatch::testing {

inline snmp::Oid random_oid(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> first(0, 2);
  std::uniform_int_distribution<int> len(0, 14);
  std::vector<std::uint32_t> arcs;
  arcs.push_back(static_cast<std::uint32_t>(first(rng)));
  if (arcs[0] < 2) {
    arcs.push_back(std::uniform_int_distribution<std::uint32_t>(0, 39)(rng));
  } else {
    arcs.push_back(std::uniform_int_distribution<std::uint32_t>(0, 0xFFFFFFFFu)(rng));
  }
  int n = len(rng);
  for (int i = 0; i < n; ++i) {
    switch (rng() % 4) {
      case 0: arcs.push_back(static_cast<std::uint32_t>(rng() % 128)); break;
      case 1: arcs.push_back(static_cast<std::uint32_t>(rng() % 20000)); break;
      case 2: arcs.push_back(0xFFFFFFFFu - static_cast<std::uint32_t>(rng() % 4)); break;
      default: arcs.push_back(static_cast<std::uint32_t>(rng())); break;
    }
  }
  return snmp::Oid(std::move(arcs));
}

inline std::string random_bytes(std::mt19937_64& rng, std::size_t max_len) {
  std::string s(rng() % (max_len + 1), '\0');
  for (auto& c : s) c = static_cast<char>(rng() & 0xFF);
  return s;
}

inline snmp::Value random_value(std::mt19937_64& rng, snmp::Version version) {
  using namespace snmp;
  int choices = version == Version::V2c ? 12 : 9;
  switch (rng() % static_cast<std::uint64_t>(choices)) {
    case 0: return Null{};
    case 1: return Integer{static_cast<std::int32_t>(rng())};
    case 2: return Counter32{static_cast<std::uint32_t>(rng())};
    case 3: return Gauge32{static_cast<std::uint32_t>(rng() >> (rng() % 32))};
    case 4: return TimeTicks{static_cast<std::uint32_t>(rng())};
    case 5: return Counter64{rng() >> (rng() % 64)};
    case 6: return OctetString{random_bytes(rng, 40)};
    case 7: return ObjectId{random_oid(rng)};
    case 8: {
      // Application tags the codec passes through untouched (IpAddress, Opaque, NsapAddress, UInteger32).
      static constexpr std::uint8_t raw_tags[] = {0x40, 0x44, 0x45, 0x47};
      return RawValue{raw_tags[rng() % 4], random_bytes(rng, 8)};
    }
    case 9: return NoSuchObject{};
    case 10: return NoSuchInstance{};
    default: return EndOfMibView{};
  }
}

inline snmp::SnmpMessage random_message(std::mt19937_64& rng) {
  using namespace snmp;
  SnmpMessage m;
  m.version = rng() % 2 ? Version::V2c : Version::V1;
  m.community = random_bytes(rng, 24);
  m.pdu_type = rng() % 2 ? PduType::Response : PduType::GetRequest;
  m.request_id = static_cast<std::int32_t>(rng());
  std::size_t n = rng() % 40;
  for (std::size_t i = 0; i < n; ++i) m.varbinds.push_back({random_oid(rng), random_value(rng, m.version)});
  m.error_status = static_cast<std::int32_t>(rng() % (kMaxErrorStatus + 1));
  m.error_index = static_cast<std::int32_t>(rng() % (n + 1));
  return m;
}

}  // namespace farmwatch::testing
