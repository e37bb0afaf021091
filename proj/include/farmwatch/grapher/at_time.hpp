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
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace farmwatch::grapher {

class BadTimeSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Seconds per relative-offset unit; y = 365 d, w = 7 d.
inline std::int64_t unit_seconds(std::string_view unit) {
  if (unit == "s" || unit == "sec" || unit == "seconds") return 1;
  if (unit == "m" || unit == "min" || unit == "minutes") return 60;
  if (unit == "h" || unit == "hours") return 3600;
  if (unit == "d" || unit == "days") return 86400;
  if (unit == "w" || unit == "weeks") return 7 * 86400;
  if (unit == "y" || unit == "years") return 365 * 86400;
  return 0;
}

// Resolves an at-style time: "now", an absolute epoch ("1018016032"), or a
// relative offset against now ("-3h", "-90m", "-10800").
inline std::int64_t parse_at_time(std::string_view text, std::int64_t now) {
  auto bad = [&text]() { return BadTimeSpec("bad time specification '" + std::string(text) + "'"); };
  if (text.empty()) throw bad();
  if (text == "now") return now;

  bool relative = false;
  std::int64_t sign = 1;
  std::string_view rest = text;
  if (text.starts_with("now")) rest.remove_prefix(3);
  if (!rest.empty() && (rest.front() == '-' || rest.front() == '+')) {
    relative = true;
    sign = rest.front() == '-' ? -1 : 1;
    rest.remove_prefix(1);
  } else if (rest.size() != text.size()) {
    throw bad();
  }

  std::int64_t count = 0;
  auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), count);
  if (ec != std::errc{} || p == rest.data() || count < 0) throw bad();
  std::string_view unit(p, static_cast<std::size_t>(rest.data() + rest.size() - p));

  if (!relative) {
    if (!unit.empty()) throw bad();
    return count;
  }
  std::int64_t scale = unit.empty() ? 1 : unit_seconds(unit);
  if (scale == 0) throw bad();
  if (count > INT64_MAX / scale) throw bad();
  return now + sign * count * scale;
}

}  // namespace farmwatch::grapher
