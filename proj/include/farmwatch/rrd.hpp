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

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <fcntl.h>
#include <vector>

#include "farmwatch/config.hpp"
#include "farmwatch/types.hpp"

namespace farmwatch::rrd {

class RrdError : public std::runtime_error {
 public:
  enum class Kind { BadSpec, NonMonotonicTime, NoSuchCf, BadWindow, IoError, CorruptFile };

  RrdError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct Variable {
  std::string id;
  VarKind kind = VarKind::Gauge;
  std::optional<double> min;
  std::optional<double> max;
  friend bool operator==(const Variable&, const Variable&) = default;
};

struct Spec {
  std::int64_t step = 0;
  std::vector<Variable> variables;
  std::vector<RraSpec> archives;

  std::int64_t rows(std::size_t archive) const {
    const auto& a = archives[archive];
    return (a.expire + a.granularity - 1) / a.granularity;
  }
  std::int64_t pdps_per_row(std::size_t archive) const { return archives[archive].granularity / step; }

  friend bool operator==(const Spec&, const Spec&) = default;
};

inline Spec spec_for_host(const HostConfig& host) {
  Spec s;
  s.step = host.polldelay;
  for (const auto& m : host.mibs) s.variables.push_back({m.id, m.kind, m.min, m.max});
  s.archives = host.rras;
  return s;
}

struct Row {
  std::int64_t time = 0;  // window end
  std::vector<std::optional<double>> values;
  friend bool operator==(const Row&, const Row&) = default;
};

struct FetchResult {
  std::size_t archive = 0;
  std::int64_t granularity = 0;
  std::vector<Row> rows;
};

struct ConsolidationEvent {
  std::size_t archive = 0;
  std::int64_t window_end = 0;
  std::vector<std::optional<double>> values;
};

struct LastValue {
  std::optional<double> value;
  std::int64_t time = 0;  // start of the step bin the value belongs to
};

inline constexpr char kMagic[4] = {'R', 'R', 'D', 'B'};
inline constexpr std::uint32_t kFormatVersion = 1;

namespace detail {

inline constexpr double kUnknown = std::numeric_limits<double>::quiet_NaN();
inline constexpr std::uint64_t kUnknownBits = 0x7FF8000000000000ull;

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

inline std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

inline std::optional<double> known(double v) {
  return std::isnan(v) ? std::nullopt : std::optional<double>(v);
}

// Fixed-size row-major table of doubles split into copy-on-write chunks, so
// copying a database to publish a snapshot only copies chunk pointers.
class RowStore {
 public:
  static constexpr std::size_t kChunkRows = 64;

  RowStore() = default;
  RowStore(std::size_t rows, std::size_t width) : rows_(rows), width_(width) {
    for (std::size_t r = 0; r < rows; r += kChunkRows) {
      std::size_t n = std::min(kChunkRows, rows - r);
      chunks_.push_back(std::make_shared<std::vector<double>>(n * width, kUnknown));
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t width() const noexcept { return width_; }

  double at(std::size_t row, std::size_t col) const {
    return (*chunks_[row / kChunkRows])[(row % kChunkRows) * width_ + col];
  }

  void write_row(std::size_t row, std::span<const double> values) {
    auto& chunk = chunks_[row / kChunkRows];
    if (chunk.use_count() > 1) chunk = std::make_shared<std::vector<double>>(*chunk);
    std::copy(values.begin(), values.end(), chunk->begin() + static_cast<std::ptrdiff_t>((row % kChunkRows) * width_));
  }

  void clear() {
    for (auto& chunk : chunks_) chunk = std::make_shared<std::vector<double>>(chunk->size(), kUnknown);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t width_ = 0;
  std::vector<std::shared_ptr<std::vector<double>>> chunks_;
};

class Writer {
 public:
  std::vector<std::uint8_t> out;
  void u8(std::uint8_t v) { out.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::isnan(v) ? kUnknownBits : std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  }
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  [[noreturn]] static void corrupt(const std::string& what) { throw RrdError(RrdError::Kind::CorruptFile, what); }
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) corrupt("truncated database file");
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_++]} << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    auto n = u32();
    need(n);
    std::string s(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline void validate_spec(const Spec& spec) {
  auto bad = [](const std::string& what) { throw RrdError(RrdError::Kind::BadSpec, what); };
  if (spec.step <= 0) bad("step must be positive");
  for (std::size_t i = 0; i < spec.variables.size(); ++i) {
    const auto& v = spec.variables[i];
    if (v.min && v.max && *v.min > *v.max) bad("variable '" + v.id + "' has min > max");
    for (std::size_t j = 0; j < i; ++j) {
      if (spec.variables[j].id == v.id) bad("duplicate variable '" + v.id + "'");
    }
  }
  for (const auto& a : spec.archives) {
    if (a.granularity <= 0 || a.expire <= 0) bad("granularity and expire must be positive");
    if (a.granularity % spec.step != 0) {
      bad("granularity " + std::to_string(a.granularity) + " is not a multiple of step " + std::to_string(spec.step));
    }
    if (!(a.xff >= 0.0 && a.xff <= 1.0)) bad("xff outside [0, 1]");
  }
}

// Constant-size round-robin store for one host: one primary data point (PDP)
// per step bin and per variable, consolidated into fixed-length archives.
//
// A sample lands in bin floor(t / step). The bin stays pending until a sample
// arrives for a later bin; then it is finalized, bins in between become unknown,
// and every archive whose window (granularity / step bins, aligned to the
// epoch) just closed receives one consolidated data point. A window's CDP is
// known iff at least one PDP is known and known / pdps_per_row >= xff.
class Rrd {
 public:
  static Rrd create(const Spec& spec, Timestamp start) {
    validate_spec(spec);
    Rrd r;
    r.spec_ = spec;
    const std::size_t n = spec.variables.size();
    r.last_update_ = static_cast<double>(detail::floor_div(static_cast<std::int64_t>(std::floor(start)), spec.step) *
                                         spec.step);
    r.pending_.assign(n, detail::kUnknown);
    r.last_known_.assign(n, detail::kUnknown);
    r.last_known_time_.assign(n, 0);
    for (std::size_t a = 0; a < spec.archives.size(); ++a) {
      r.archives_.push_back(Archive{std::vector<double>(n, detail::kUnknown), std::vector<std::uint32_t>(n, 0),
                                    detail::RowStore(static_cast<std::size_t>(spec.rows(a)), n)});
    }
    return r;
  }

  const Spec& spec() const noexcept { return spec_; }
  Timestamp last_update() const noexcept { return last_update_; }

  std::vector<ConsolidationEvent> update(Timestamp time, std::span<const std::optional<double>> values) {
    if (values.size() != spec_.variables.size()) {
      throw std::invalid_argument("update carries " + std::to_string(values.size()) + " values for " +
                                  std::to_string(spec_.variables.size()) + " variables");
    }
    if (!(time > last_update_)) {
      throw RrdError(RrdError::Kind::NonMonotonicTime, "sample time " + std::to_string(time) +
                                                           " is not after last update " + std::to_string(last_update_));
    }
    std::vector<ConsolidationEvent> events;
    const std::int64_t cur = current_bin();
    const std::int64_t next = detail::floor_div(static_cast<std::int64_t>(std::floor(time)), spec_.step);
    if (next > cur) {
      finalize_bin(cur, events);
      skip_unknown(cur + 1, next, events);
      std::fill(pending_.begin(), pending_.end(), detail::kUnknown);
    }
    for (std::size_t v = 0; v < values.size(); ++v) {
      if (values[v]) pending_[v] = *values[v];
    }
    last_update_ = time;
    return events;
  }

  // Rows for [start, end) from the finest archive of `cf` whose retention
  // covers `start`, else from the one reaching back furthest. Windows outside
  // what the archive holds come back unknown.
  FetchResult fetch(ConsolidationFn cf, Timestamp start, Timestamp end) const {
    if (!(start < end)) throw RrdError(RrdError::Kind::BadWindow, "fetch window is empty");
    std::optional<std::size_t> best;
    std::optional<std::size_t> longest;
    for (std::size_t a = 0; a < spec_.archives.size(); ++a) {
      const auto& arc = spec_.archives[a];
      if (arc.cf != cf) continue;
      std::int64_t oldest_start = (last_done(a) - spec_.rows(a) + 1) * arc.granularity;
      if (static_cast<double>(oldest_start) <= start &&
          (!best || arc.granularity < spec_.archives[*best].granularity)) {
        best = a;
      }
      auto reach = spec_.rows(a) * arc.granularity;
      if (!longest || reach > spec_.rows(*longest) * spec_.archives[*longest].granularity ||
          (reach == spec_.rows(*longest) * spec_.archives[*longest].granularity &&
           arc.granularity > spec_.archives[*longest].granularity)) {
        longest = a;
      }
    }
    if (!longest) {
      throw RrdError(RrdError::Kind::NoSuchCf, "no " + std::string(to_string(cf)) + " archive");
    }
    const std::size_t a = best ? *best : *longest;
    const std::int64_t gran = spec_.archives[a].granularity;
    const std::int64_t first = detail::floor_div(static_cast<std::int64_t>(std::floor(start)), gran);
    const std::int64_t last = detail::floor_div(static_cast<std::int64_t>(std::ceil(end)) - 1, gran);
    if (last - first + 1 > kMaxFetchRows) throw RrdError(RrdError::Kind::BadWindow, "fetch window too large");
    FetchResult res;
    res.archive = a;
    res.granularity = gran;
    for (std::int64_t w = first; w <= last; ++w) res.rows.push_back(row_for_window(a, w));
    return res;
  }

  // Everything archive `a` currently retains, oldest first.
  std::vector<Row> archive_rows(std::size_t a) const {
    std::vector<Row> rows;
    const std::int64_t done = last_done(a);
    for (std::int64_t w = done - spec_.rows(a) + 1; w <= done; ++w) rows.push_back(row_for_window(a, w));
    return rows;
  }

  // End of the newest window archive `a` has consolidated.
  std::int64_t last_window_end(std::size_t a) const { return (last_done(a) + 1) * spec_.archives[a].granularity; }

  std::vector<LastValue> last_values() const {
    std::vector<LastValue> out(spec_.variables.size());
    const std::int64_t bin_time = current_bin() * spec_.step;
    for (std::size_t v = 0; v < out.size(); ++v) {
      if (!std::isnan(pending_[v])) {
        out[v] = {pending_[v], bin_time};
      } else {
        out[v] = {detail::known(last_known_[v]), last_known_time_[v]};
      }
    }
    return out;
  }

  std::vector<std::uint8_t> serialize() const {
    detail::Writer w;
    w.out.insert(w.out.end(), std::begin(kMagic), std::end(kMagic));
    w.u32(kFormatVersion);
    w.i64(spec_.step);
    w.u32(static_cast<std::uint32_t>(spec_.variables.size()));
    for (const auto& v : spec_.variables) {
      w.str(v.id);
      w.u8(static_cast<std::uint8_t>(v.kind));
      w.u8(v.min.has_value());
      w.f64(v.min.value_or(0.0));
      w.u8(v.max.has_value());
      w.f64(v.max.value_or(0.0));
    }
    w.u32(static_cast<std::uint32_t>(spec_.archives.size()));
    for (std::size_t a = 0; a < spec_.archives.size(); ++a) {
      const auto& arc = spec_.archives[a];
      w.u8(static_cast<std::uint8_t>(arc.cf));
      w.f64(arc.xff);
      w.i64(arc.granularity);
      w.i64(arc.expire);
      w.u64(static_cast<std::uint64_t>(spec_.rows(a)));
    }
    w.f64(last_update_);
    for (std::size_t v = 0; v < pending_.size(); ++v) {
      w.f64(pending_[v]);
      w.f64(last_known_[v]);
      w.i64(last_known_time_[v]);
    }
    for (const auto& arc : archives_) {
      for (std::size_t v = 0; v < arc.acc.size(); ++v) {
        w.f64(arc.acc[v]);
        w.u32(arc.known[v]);
      }
    }
    for (const auto& arc : archives_) {
      for (std::size_t r = 0; r < arc.rows.rows(); ++r) {
        for (std::size_t c = 0; c < arc.rows.width(); ++c) w.f64(arc.rows.at(r, c));
      }
    }
    w.u32(static_cast<std::uint32_t>(crc32(0L, w.out.data(), static_cast<uInt>(w.out.size()))));
    return std::move(w.out);
  }

  static Rrd deserialize(std::span<const std::uint8_t> bytes) {
    using detail::Reader;
    if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) Reader::corrupt("bad magic");
    const auto payload = bytes.first(bytes.size() - 4);
    Reader tail(bytes.last(4));
    if (tail.u32() != static_cast<std::uint32_t>(crc32(0L, payload.data(), static_cast<uInt>(payload.size())))) {
      Reader::corrupt("checksum mismatch");
    }
    Reader r(payload.subspan(4));
    if (r.u32() != kFormatVersion) Reader::corrupt("unsupported format version");

    Spec spec;
    spec.step = r.i64();
    auto nvars = r.u32();
    if (nvars > r.remaining()) Reader::corrupt("variable count exceeds file size");
    for (std::uint32_t i = 0; i < nvars; ++i) {
      Variable v;
      v.id = r.str();
      auto kind = r.u8();
      if (kind > 2) Reader::corrupt("bad variable kind");
      v.kind = static_cast<VarKind>(kind);
      bool has_min = r.u8();
      double min = r.f64();
      bool has_max = r.u8();
      double max = r.f64();
      if (has_min) v.min = min;
      if (has_max) v.max = max;
      spec.variables.push_back(std::move(v));
    }
    auto narch = r.u32();
    if (narch > r.remaining()) Reader::corrupt("archive count exceeds file size");
    std::vector<std::uint64_t> stored_rows;
    for (std::uint32_t i = 0; i < narch; ++i) {
      RraSpec a;
      auto cf = r.u8();
      if (cf > 3) Reader::corrupt("bad consolidation function");
      a.cf = static_cast<ConsolidationFn>(cf);
      a.xff = r.f64();
      a.granularity = r.i64();
      a.expire = r.i64();
      stored_rows.push_back(r.u64());
      spec.archives.push_back(a);
    }
    try {
      validate_spec(spec);
    } catch (const RrdError& e) {
      Reader::corrupt(std::string("bad stored spec: ") + e.what());
    }
    std::size_t cells = 0;
    for (std::size_t a = 0; a < narch; ++a) {
      if (stored_rows[a] != static_cast<std::uint64_t>(spec.rows(a))) Reader::corrupt("row count mismatch");
      cells += stored_rows[a] * nvars;
    }
    std::size_t expect = 8 + nvars * 24 + narch * nvars * 12 + cells * 8;
    if (r.remaining() != expect) Reader::corrupt("file size does not match stored spec");

    Rrd db = create(spec, 0);
    db.last_update_ = r.f64();
    for (std::size_t v = 0; v < nvars; ++v) {
      db.pending_[v] = r.f64();
      db.last_known_[v] = r.f64();
      db.last_known_time_[v] = r.i64();
    }
    for (auto& arc : db.archives_) {
      for (std::size_t v = 0; v < nvars; ++v) {
        arc.acc[v] = r.f64();
        arc.known[v] = r.u32();
      }
    }
    std::vector<double> row(nvars);
    for (auto& arc : db.archives_) {
      for (std::size_t i = 0; i < arc.rows.rows(); ++i) {
        for (auto& c : row) c = r.f64();
        arc.rows.write_row(i, row);
      }
    }
    return db;
  }

  std::size_t serialized_size() const { return serialize().size(); }

  // Atomic replace: write a sibling temp file, flush it, then rename over `path`.
  void save(const std::filesystem::path& path) const {
    auto bytes = serialize();
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw RrdError(RrdError::Kind::IoError, "cannot create '" + tmp.string() + "'");
    std::size_t off = 0;
    while (off < bytes.size()) {
      auto n = ::write(fd, bytes.data() + off, bytes.size() - off);
      if (n <= 0) {
        ::close(fd);
        ::unlink(tmp.c_str());
        throw RrdError(RrdError::Kind::IoError, "write to '" + tmp.string() + "' failed");
      }
      off += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
      ::unlink(tmp.c_str());
      throw RrdError(RrdError::Kind::IoError, "cannot rename onto '" + path.string() + "'");
    }
  }

  static Rrd load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RrdError(RrdError::Kind::IoError, "cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
  }

  friend bool operator==(const Rrd& a, const Rrd& b) { return a.serialize() == b.serialize(); }

  static constexpr std::int64_t kMaxFetchRows = 1'000'000;

 private:
  struct Archive {
    std::vector<double> acc;           // running consolidation for the open window
    std::vector<std::uint32_t> known;  // known PDPs in the open window
    detail::RowStore rows;             // slot = window index mod rows
  };

  std::int64_t current_bin() const {
    return detail::floor_div(static_cast<std::int64_t>(std::floor(last_update_)), spec_.step);
  }

  std::int64_t last_done(std::size_t a) const { return detail::floor_div(current_bin(), spec_.pdps_per_row(a)) - 1; }

  Row row_for_window(std::size_t a, std::int64_t w) const {
    Row row;
    row.time = (w + 1) * spec_.archives[a].granularity;
    const std::int64_t done = last_done(a);
    const std::int64_t nrows = spec_.rows(a);
    row.values.resize(spec_.variables.size());
    if (w <= done && w > done - nrows) {
      auto slot = static_cast<std::size_t>(detail::floor_mod(w, nrows));
      for (std::size_t v = 0; v < row.values.size(); ++v) row.values[v] = detail::known(archives_[a].rows.at(slot, v));
    }
    return row;
  }

  void finalize_bin(std::int64_t bin, std::vector<ConsolidationEvent>& events) {
    for (std::size_t v = 0; v < pending_.size(); ++v) {
      if (!std::isnan(pending_[v])) {
        last_known_[v] = pending_[v];
        last_known_time_[v] = bin * spec_.step;
      }
    }
    for (std::size_t a = 0; a < archives_.size(); ++a) {
      auto& arc = archives_[a];
      const auto cf = spec_.archives[a].cf;
      for (std::size_t v = 0; v < pending_.size(); ++v) {
        const double x = pending_[v];
        if (std::isnan(x)) continue;
        double& acc = arc.acc[v];
        if (arc.known[v] == 0) {
          acc = x;
        } else {
          switch (cf) {
            case ConsolidationFn::Average: acc += x; break;
            case ConsolidationFn::Min: acc = std::min(acc, x); break;
            case ConsolidationFn::Max: acc = std::max(acc, x); break;
            case ConsolidationFn::Last: acc = x; break;
          }
        }
        ++arc.known[v];
      }
      const std::int64_t ppw = spec_.pdps_per_row(a);
      if (detail::floor_mod(bin + 1, ppw) == 0) emit(a, detail::floor_div(bin, ppw), events);
    }
  }

  // Bins [from, to) carry no data.
  void skip_unknown(std::int64_t from, std::int64_t to, std::vector<ConsolidationEvent>& events) {
    if (from >= to) return;
    for (std::size_t a = 0; a < archives_.size(); ++a) {
      const std::int64_t ppw = spec_.pdps_per_row(a);
      const std::int64_t nrows = spec_.rows(a);
      std::int64_t w = detail::floor_div(from, ppw);
      if ((w + 1) * ppw > to) continue;  // open window stays open
      emit(a, w, events);
      const std::int64_t first_empty = w + 1;
      const std::int64_t last_empty = detail::floor_div(to, ppw) - 1;  // windows closed entirely inside the gap
      if (last_empty < first_empty) continue;
      const std::int64_t start = std::max(first_empty, last_empty - nrows + 1);
      const std::vector<double> blank(spec_.variables.size(), detail::kUnknown);
      for (std::int64_t e = start; e <= last_empty; ++e) {
        archives_[a].rows.write_row(static_cast<std::size_t>(detail::floor_mod(e, nrows)), blank);
        events.push_back({a, (e + 1) * spec_.archives[a].granularity,
                          std::vector<std::optional<double>>(spec_.variables.size())});
      }
    }
  }

  void emit(std::size_t a, std::int64_t window, std::vector<ConsolidationEvent>& events) {
    auto& arc = archives_[a];
    const auto& rs = spec_.archives[a];
    const std::int64_t ppw = spec_.pdps_per_row(a);
    const std::size_t n = spec_.variables.size();
    std::vector<double> row(n, detail::kUnknown);
    ConsolidationEvent ev{a, (window + 1) * rs.granularity, std::vector<std::optional<double>>(n)};
    for (std::size_t v = 0; v < n; ++v) {
      const std::uint32_t k = arc.known[v];
      if (k > 0 && static_cast<double>(k) / static_cast<double>(ppw) >= rs.xff) {
        row[v] = rs.cf == ConsolidationFn::Average ? arc.acc[v] / static_cast<double>(k) : arc.acc[v];
        ev.values[v] = row[v];
      }
      arc.acc[v] = detail::kUnknown;
      arc.known[v] = 0;
    }
    arc.rows.write_row(static_cast<std::size_t>(detail::floor_mod(window, spec_.rows(a))), row);
    events.push_back(std::move(ev));
  }

  Spec spec_;
  Timestamp last_update_ = 0;
  std::vector<double> pending_;
  std::vector<double> last_known_;
  std::vector<std::int64_t> last_known_time_;
  std::vector<Archive> archives_;
};

// Windows-of-text dump of every archive for debugging.
inline std::string dump(const Rrd& db) {
  std::string out;
  const auto& spec = db.spec();
  out += "step " + std::to_string(spec.step) + " last_update " + std::to_string(db.last_update()) + "\n";
  for (std::size_t a = 0; a < spec.archives.size(); ++a) {
    const auto& arc = spec.archives[a];
    out += "archive " + std::to_string(a) + " cf " + std::string(to_string(arc.cf)) + " granularity " +
           std::to_string(arc.granularity) + " rows " + std::to_string(spec.rows(a)) + "\n";
    out += "time";
    for (const auto& v : spec.variables) out += " " + v.id;
    out += "\n";
    for (const auto& row : db.archive_rows(a)) {
      out += std::to_string(row.time);
      for (const auto& v : row.values) {
        if (v) {
          char buf[64];
          std::snprintf(buf, sizeof buf, " %.6f", *v);
          out += buf;
        } else {
          out += " U";
        }
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace farmwatch::rrd
