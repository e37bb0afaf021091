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

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "farmwatch/archive_store.hpp"
#include "farmwatch/collector.hpp"
#include "farmwatch/config.hpp"
#include "farmwatch/http.hpp"
#include "farmwatch/status.hpp"

namespace farmwatch {

// Verbosity 0 is the most detailed, 3 silences the log.
inline spdlog::level::level_enum log_level_for(int verbosity) {
  switch (verbosity) {
    case 0: return spdlog::level::debug;
    case 1: return spdlog::level::info;
    case 2: return spdlog::level::warn;
    default: return spdlog::level::off;
  }
}

inline void configure_logging(const MonitorConfig& cfg) {
  std::shared_ptr<spdlog::logger> logger;
  if (cfg.pmc_logfile) {
    logger = spdlog::basic_logger_mt("farmwatch", cfg.pmc_logfile->string());
  } else {
    logger = spdlog::stderr_logger_mt("farmwatch");
  }
  logger->set_level(log_level_for(cfg.verbosity));
  logger->flush_on(spdlog::level::warn);
  spdlog::set_default_logger(logger);
}

struct DaemonOptions {
  CollectorOptions collector;
  std::string xslt_command = "xsltproc {} -";
  std::string http_host = "0.0.0.0";
  double flush_interval = 300;  // seconds between archive writes
  bool persist = true;
};

// Collector, HTTP server and archive flusher wired together. The constructor
// loads archives and binds the HTTP port; start() launches the threads;
// shutdown() stops polling, flushes the archives, then stops the server.
class Monitor {
 public:
  Monitor(MonitorConfig cfg, DaemonOptions opts)
      : cfg_(std::move(cfg)),
        opts_(std::move(opts)),
        archives_(cfg_, clock_.now(), opts_.persist),
        status_(cfg_),
        server_(http::Context{cfg_, status_, archives_, opts_.xslt_command}) {
    server_.bind(opts_.http_host, cfg_.http_port);
    collector_ = std::make_unique<Collector>(
        cfg_, clock_, transport_, opts_.collector,
        [this](std::size_t host, const PollResult& r, const ProcessedValues& p) {
          status_.apply_poll_result(r, p);
          archives_.update(host, cfg_.hosts[host], r.time, p);
        });
  }

  Monitor(const Monitor&) = delete;
  Monitor& operator=(const Monitor&) = delete;
  ~Monitor() { shutdown(); }

  int http_port() const noexcept { return server_.port(); }
  const MonitorConfig& config() const noexcept { return cfg_; }
  const StatusView& status() const noexcept { return status_; }
  const ArchiveStore& archives() const noexcept { return archives_; }
  const CollectorStats& collector_stats() const noexcept { return collector_->stats(); }

  void start() {
    spdlog::info("serving http on port {}; polling {} hosts", server_.port(), cfg_.hosts.size());
    http_thread_ = std::thread([this] { server_.run(); });
    server_.wait_until_ready();
    collector_thread_ = std::thread([this] { collector_->run([this] { return !stopping_.load(); }); });
    flush_thread_ = std::thread([this] {
      std::unique_lock lock(flush_mu_);
      while (!flush_cv_.wait_for(lock, std::chrono::duration<double>(opts_.flush_interval),
                                 [this] { return stopping_.load(); })) {
        lock.unlock();
        archives_.flush();
        lock.lock();
      }
    });
  }

  void shutdown() {
    if (done_.exchange(true)) return;
    {
      std::lock_guard lock(flush_mu_);
      stopping_ = true;
    }
    flush_cv_.notify_all();
    if (collector_thread_.joinable()) collector_thread_.join();
    if (flush_thread_.joinable()) flush_thread_.join();
    archives_.flush();
    server_.stop();
    if (http_thread_.joinable()) http_thread_.join();
    spdlog::info("shutdown complete");
  }

 private:
  MonitorConfig cfg_;
  DaemonOptions opts_;
  SystemClock clock_;
  UdpTransport transport_;
  ArchiveStore archives_;
  StatusView status_;
  http::Server server_;
  std::unique_ptr<Collector> collector_;
  std::atomic<bool> stopping_{false};
  std::atomic<bool> done_{false};
  std::mutex flush_mu_;
  std::condition_variable flush_cv_;
  std::thread collector_thread_, http_thread_, flush_thread_;
};

}  // namespace farmwatch
