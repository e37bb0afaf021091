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

#include <filesystem>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "farmwatch/collector.hpp"
#include "farmwatch/config.hpp"
#include "farmwatch/rrd.hpp"

namespace farmwatch {

class ArchiveMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One round-robin database per host. The collector is the only writer; after
// each update a copy-on-write snapshot is published for readers.
class ArchiveStore {
 public:
  // Loads `<rrd_dir>/<host>.rrd` where present, otherwise creates a fresh
  // database. An existing file built from a different spec is an error.
  ArchiveStore(const MonitorConfig& cfg, Timestamp now, bool persist = true) : dir_(cfg.rrd_dir), persist_(persist) {
    for (const auto& h : cfg.hosts) {
      auto spec = rrd::spec_for_host(h);
      auto path = file_for(h.name);
      Slot slot;
      slot.name = h.name;
      if (persist_ && std::filesystem::exists(path)) {
        auto db = rrd::Rrd::load(path);
        if (!(db.spec() == spec)) {
          throw ArchiveMismatch("archive '" + path.string() + "' was created for a different configuration of host '" +
                                h.name + "'; move it aside or restore the matching config");
        }
        slot.db = std::move(db);
        spdlog::info("host {}: loaded archive {}", h.name, path.string());
      } else {
        slot.db = rrd::Rrd::create(spec, now);
      }
      slot.snapshot = std::make_shared<const rrd::Rrd>(slot.db);
      slots_.push_back(std::move(slot));
    }
  }

  std::filesystem::path file_for(const std::string& host) const { return dir_ / (host + ".rrd"); }

  std::size_t size() const noexcept { return slots_.size(); }

  void update(std::size_t host, const HostConfig& hc, Timestamp t, const ProcessedValues& processed) {
    auto& slot = slots_.at(host);
    std::vector<std::optional<double>> row;
    row.reserve(hc.mibs.size());
    for (const auto& m : hc.mibs) {
      auto it = processed.find(m.id);
      row.push_back(it == processed.end() ? std::nullopt : it->second);
    }
    try {
      slot.db.update(t, row);
    } catch (const rrd::RrdError& e) {
      spdlog::warn("host {}: sample dropped: {}", hc.name, e.what());
      return;
    }
    auto snap = std::make_shared<const rrd::Rrd>(slot.db);
    std::lock_guard lock(mu_);
    slot.snapshot = std::move(snap);
    slot.dirty = true;
  }

  std::shared_ptr<const rrd::Rrd> snapshot(std::size_t host) const {
    std::lock_guard lock(mu_);
    return slots_.at(host).snapshot;
  }

  std::shared_ptr<const rrd::Rrd> snapshot(std::string_view name) const {
    std::lock_guard lock(mu_);
    for (const auto& s : slots_) {
      if (s.name == name) return s.snapshot;
    }
    return nullptr;
  }

  // Writes every database changed since the last flush. Safe to call from a
  // thread other than the writer.
  void flush() {
    if (!persist_) return;
    std::lock_guard flushing(flush_mu_);
    std::vector<std::pair<std::string, std::shared_ptr<const rrd::Rrd>>> pending;
    {
      std::lock_guard lock(mu_);
      for (auto& s : slots_) {
        if (!s.dirty) continue;
        s.dirty = false;
        pending.emplace_back(s.name, s.snapshot);
      }
    }
    if (pending.empty()) return;
    std::filesystem::create_directories(dir_);
    for (const auto& [name, db] : pending) {
      try {
        db->save(file_for(name));
      } catch (const rrd::RrdError& e) {
        spdlog::error("host {}: {}", name, e.what());
      }
    }
  }

 private:
  struct Slot {
    std::string name;
    rrd::Rrd db;
    std::shared_ptr<const rrd::Rrd> snapshot;
    bool dirty = false;
  };

  std::filesystem::path dir_;
  bool persist_;
  mutable std::mutex mu_;
  std::mutex flush_mu_;
  std::vector<Slot> slots_;
};

}  // namespace farmwatch
