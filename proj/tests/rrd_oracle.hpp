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

// Flat reference model of a round-robin database: keeps every primary data
// point and consolidates any window on demand.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "farmwatch/rrd.hpp"

namespace farmwatch::testing {

class RrdOracle {
 public:
  RrdOracle(rrd::Spec spec, double start) : spec_(std::move(spec)) {
    bin_ = floor_div(static_cast<std::int64_t>(std::floor(start)), spec_.step);
  }

  void update(double t, const std::vector<std::optional<double>>& values) {
    auto bin = floor_div(static_cast<std::int64_t>(std::floor(t)), spec_.step);
    bin_ = bin;
    auto& slot = pdps_[bin];
    slot.resize(values.size());
    for (std::size_t v = 0; v < values.size(); ++v) {
      if (values[v]) slot[v] = values[v];
    }
  }

  std::optional<double> pdp(std::int64_t bin, std::size_t v) const {
    auto it = pdps_.find(bin);
    if (it == pdps_.end()) return std::nullopt;
    return it->second[v];
  }

  std::optional<double> cdp(std::size_t a, std::int64_t window, std::size_t v) const {
    const auto& arc = spec_.archives[a];
    const std::int64_t ppw = arc.granularity / spec_.step;
    std::vector<double> known;
    for (std::int64_t b = window * ppw; b < (window + 1) * ppw; ++b) {
      if (b >= bin_) return std::nullopt;  // not closed yet
      if (auto x = pdp(b, v)) known.push_back(*x);
    }
    if (known.empty() || static_cast<double>(known.size()) / static_cast<double>(ppw) < arc.xff) return std::nullopt;
    switch (arc.cf) {
      case ConsolidationFn::Average: {
        double s = 0;
        for (double x : known) s += x;
        return s / static_cast<double>(known.size());
      }
      case ConsolidationFn::Min: return *std::min_element(known.begin(), known.end());
      case ConsolidationFn::Max: return *std::max_element(known.begin(), known.end());
      case ConsolidationFn::Last: return known.back();
    }
    return std::nullopt;
  }

  // Retained windows, oldest first, as (window end, values).
  std::vector<rrd::Row> archive_rows(std::size_t a) const {
    const std::int64_t gran = spec_.archives[a].granularity;
    const std::int64_t ppw = gran / spec_.step;
    const std::int64_t done = floor_div(bin_, ppw) - 1;
    std::vector<rrd::Row> rows;
    for (std::int64_t w = done - spec_.rows(a) + 1; w <= done; ++w) {
      rrd::Row r;
      r.time = (w + 1) * gran;
      for (std::size_t v = 0; v < spec_.variables.size(); ++v) r.values.push_back(cdp(a, w, v));
      rows.push_back(std::move(r));
    }
    return rows;
  }

  static std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
  }

 private:
  rrd::Spec spec_;
  std::int64_t bin_ = 0;
  std::map<std::int64_t, std::vector<std::optional<double>>> pdps_;
};

}  // namespace farmwatch::testing
