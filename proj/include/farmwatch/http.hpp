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

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "farmwatch/archive_store.hpp"
#include "farmwatch/config.hpp"
#include "farmwatch/grapher/at_time.hpp"
#include "farmwatch/grapher/render.hpp"
#include "farmwatch/process.hpp"
#include "farmwatch/status.hpp"

namespace farmwatch::http {

namespace fs = std::filesystem;

struct Response {
  int status = 200;
  std::string content_type = "text/plain";
  std::string body;
};

using Query = std::vector<std::pair<std::string, std::string>>;

inline std::optional<std::string> percent_decode(std::string_view s, bool plus_is_space) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '%') {
      if (i + 2 >= s.size()) return std::nullopt;
      unsigned v = 0;
      auto [p, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
      if (ec != std::errc{} || p != s.data() + i + 3) return std::nullopt;
      out += static_cast<char>(v);
      i += 2;
    } else if (c == '+' && plus_is_space) {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

// Splits on both '&' and ';'.
inline std::optional<Query> parse_query(std::string_view q) {
  Query out;
  while (!q.empty()) {
    auto cut = q.find_first_of("&;");
    auto part = q.substr(0, cut);
    q = cut == std::string_view::npos ? std::string_view{} : q.substr(cut + 1);
    if (part.empty()) continue;
    auto eq = part.find('=');
    auto key = percent_decode(part.substr(0, eq), true);
    auto val = percent_decode(eq == std::string_view::npos ? std::string_view{} : part.substr(eq + 1), true);
    if (!key || !val) return std::nullopt;
    out.emplace_back(std::move(*key), std::move(*val));
  }
  return out;
}

inline const std::string* find_param(const Query& q, std::string_view key) {
  const std::string* hit = nullptr;
  for (const auto& [k, v] : q) {
    if (k == key) hit = &v;  // last occurrence wins
  }
  return hit;
}

namespace route {

struct StaticFile {
  std::vector<std::string> segments;  // relative to html_dir, already vetted
  friend bool operator==(const StaticFile&, const StaticFile&) = default;
};
struct Graph {
  std::string host;
  std::string graph;
  Query query;
  friend bool operator==(const Graph&, const Graph&) = default;
};
struct ClusterStatus {
  std::optional<std::string> transform;
  friend bool operator==(const ClusterStatus&, const ClusterStatus&) = default;
};
struct HostStatus {
  std::string host;
  std::optional<std::string> transform;
  friend bool operator==(const HostStatus&, const HostStatus&) = default;
};
struct Error {
  int status;
  std::string message;
  friend bool operator==(const Error&, const Error&) = default;
};

}  // namespace route

using Route = std::variant<route::StaticFile, route::Graph, route::ClusterStatus, route::HostStatus, route::Error>;

inline bool safe_segment(std::string_view s) {
  return s != ".." && s != "." && s.find('/') == std::string_view::npos &&
         s.find('\\') == std::string_view::npos && s.find('\0') == std::string_view::npos;
}

// Maps a request onto the URI grammar. Host and graph names are checked
// against `cfg`; files are not touched.
inline Route resolve_route(std::string_view method, std::string_view target, const MonitorConfig& cfg) {
  if (method != "GET" && method != "HEAD") return route::Error{405, "method not allowed"};
  auto qpos = target.find('?');
  auto raw_path = target.substr(0, qpos);
  if (raw_path.empty() || raw_path.front() != '/') return route::Error{400, "bad request target"};
  auto query = parse_query(qpos == std::string_view::npos ? std::string_view{} : target.substr(qpos + 1));
  if (!query) return route::Error{400, "malformed query string"};

  std::vector<std::string> segs;
  std::string_view rest = raw_path.substr(1);
  while (true) {
    auto cut = rest.find('/');
    auto seg = percent_decode(rest.substr(0, cut), false);
    if (!seg) return route::Error{400, "malformed path"};
    if (!safe_segment(*seg)) return route::Error{403, "path traversal rejected"};
    if (!seg->empty()) segs.push_back(std::move(*seg));
    if (cut == std::string_view::npos) break;
    rest = rest.substr(cut + 1);
  }

  std::optional<std::string> transform;
  if (const auto* t = find_param(*query, "applyTransform")) {
    if (t->empty() || !safe_segment(*t)) return route::Error{403, "transform name must be a plain file name"};
    transform = *t;
  }

  if (segs.size() == 1 && segs[0] == "status.html") return route::ClusterStatus{transform};
  if (segs.size() == 2) {
    if (const auto* host = cfg.find_host(segs[0])) {
      if (segs[1] == "status.html") return route::HostStatus{segs[0], transform};
      if (!host->find_graph(segs[1])) return route::Error{404, "host '" + segs[0] + "' has no graph '" + segs[1] + "'"};
      return route::Graph{segs[0], segs[1], *query};
    }
  }
  if (segs.empty()) segs.push_back("index.html");
  return route::StaticFile{std::move(segs)};
}

struct Context {
  const MonitorConfig& cfg;
  const StatusView& status;
  const ArchiveStore& archives;
  std::string xslt_command = "xsltproc {} -";  // {} = stylesheet path
  std::function<std::int64_t()> now = [] { return static_cast<std::int64_t>(std::time(nullptr)); };
  double subprocess_timeout = 30;
};

namespace detail {

inline Response error(int status, std::string message) { return {status, "text/plain", std::move(message) + "\n"}; }

inline std::string content_type_for(const fs::path& p) {
  static const std::map<std::string, std::string> types = {
      {".html", "text/html"},      {".htm", "text/html"},       {".css", "text/css"},
      {".js", "text/javascript"},  {".xml", "text/xml"},        {".xsl", "text/xml"},
      {".png", "image/png"},       {".svg", "image/svg+xml"},   {".jpg", "image/jpeg"},
      {".gif", "image/gif"},       {".txt", "text/plain"},      {".json", "application/json"}};
  auto it = types.find(p.extension().string());
  return it == types.end() ? "application/octet-stream" : it->second;
}

inline std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Keeps resolved paths inside `root`, following symlinks.
inline std::optional<fs::path> contained(const fs::path& root, const std::vector<std::string>& segments) {
  std::error_code ec;
  auto base = fs::weakly_canonical(root, ec);
  if (ec) return std::nullopt;
  fs::path p = base;
  for (const auto& s : segments) p /= s;
  auto real = fs::weakly_canonical(p, ec);
  if (ec) return std::nullopt;
  auto rel = real.lexically_relative(base);
  if (rel.empty() || *rel.begin() == "..") return std::nullopt;
  return real;
}

inline std::optional<int> to_int(const std::string& s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string command_for(const std::string& tmpl, const fs::path& stylesheet) {
  auto quoted = process::shell_quote(stylesheet.string());
  auto at = tmpl.find("{}");
  if (at == std::string::npos) return tmpl + " " + quoted;
  return tmpl.substr(0, at) + quoted + tmpl.substr(at + 2);
}

}  // namespace detail

inline Response apply_transform(const Context& ctx, const std::string& xml_doc, const std::string& name) {
  auto sheet = detail::contained(ctx.cfg.xslt_dir, {name});
  std::error_code ec;
  if (!sheet || !fs::is_regular_file(*sheet, ec)) return detail::error(404, "no such transform '" + name + "'");
  auto res = process::run_shell(detail::command_for(ctx.xslt_command, *sheet), xml_doc, ctx.subprocess_timeout);
  if (!res.ok()) {
    spdlog::error("transform {} failed (exit {}{}): {}", name, res.exit_code, res.timed_out ? ", timed out" : "",
                  res.err);
    return detail::error(500, "transform failed");
  }
  return {200, "text/html", std::move(res.out)};
}

inline Response handle_graph(const Context& ctx, const route::Graph& g) {
  const auto* host = ctx.cfg.find_host(g.host);
  const auto* spec = host ? host->find_graph(g.graph) : nullptr;
  if (!spec) return detail::error(404, "no such graph");
  grapher::RenderRequest req;
  req.width = spec->width;
  req.height = spec->height;
  req.title = spec->title;
  std::string start = spec->seconds;
  if (const auto* w = find_param(g.query, "width")) {
    auto v = detail::to_int(*w);
    if (!v) return detail::error(400, "width must be an integer");
    req.width = *v;
  }
  if (const auto* h = find_param(g.query, "height")) {
    auto v = detail::to_int(*h);
    if (!v) return detail::error(400, "height must be an integer");
    req.height = *v;
  }
  if (const auto* s = find_param(g.query, "start")) start = *s;
  const auto now = ctx.now();
  try {
    req.start = grapher::parse_at_time(start, now);
  } catch (const grapher::BadTimeSpec& e) {
    return detail::error(400, e.what());
  }
  req.end = now;
  auto format = grapher::format_for(g.graph);
  if (!format) return detail::error(404, "unsupported image type");
  auto db = ctx.archives.snapshot(std::string_view(g.host));
  if (!db) return detail::error(404, "no archive for host");
  try {
    auto img = grapher::render(spec->program, *db, req, *format);
    return {200, img.content_type, std::string(img.bytes.begin(), img.bytes.end())};
  } catch (const grapher::GraphError& e) {
    using K = grapher::GraphError::Kind;
    return detail::error(e.kind() == K::BadSize || e.kind() == K::WindowEmpty ? 400 : 404, e.what());
  }
}

inline bool filter_applies(const MonitorConfig& cfg, std::string_view path) {
  if (!cfg.http_filter || cfg.http_filter_extensions.empty()) return false;
  auto ext = fs::path(std::string(path)).extension().string();
  for (const auto& e : cfg.http_filter_extensions) {
    if (e == ext) return true;
  }
  return false;
}

inline Response apply_filter(const Context& ctx, Response r, std::string_view path) {
  if (r.status != 200 || !filter_applies(ctx.cfg, path)) return r;
  auto res = process::run_shell(*ctx.cfg.http_filter, r.body, ctx.subprocess_timeout);
  if (!res.ok()) {
    spdlog::error("filter '{}' failed (exit {}): {}", *ctx.cfg.http_filter, res.exit_code, res.err);
    return detail::error(500, "filter failed");
  }
  r.body = std::move(res.out);
  return r;
}

inline Response handle_request(const Context& ctx, std::string_view method, std::string_view target) {
  auto route = resolve_route(method, target, ctx.cfg);
  Response r;
  std::string filter_path;
  if (auto* e = std::get_if<route::Error>(&route)) return detail::error(e->status, e->message);
  if (auto* c = std::get_if<route::ClusterStatus>(&route)) {
    auto doc = serialize_status_xml(*ctx.status.snapshot());
    r = c->transform ? apply_transform(ctx, doc, *c->transform) : Response{200, "text/xml", std::move(doc)};
    filter_path = "/status.html";
  } else if (auto* h = std::get_if<route::HostStatus>(&route)) {
    auto snap = ctx.status.snapshot();
    const auto* hs = snap->find(h->host);
    if (!hs) return detail::error(404, "unknown host '" + h->host + "'");
    auto doc = serialize_status_xml(*hs);
    r = h->transform ? apply_transform(ctx, doc, *h->transform) : Response{200, "text/xml", std::move(doc)};
    filter_path = "/" + h->host + "/status.html";
  } else if (auto* g = std::get_if<route::Graph>(&route)) {
    r = handle_graph(ctx, *g);
    filter_path = "/" + g->host + "/" + g->graph;
  } else {
    const auto& f = std::get<route::StaticFile>(route);
    auto path = detail::contained(ctx.cfg.html_dir, f.segments);
    if (!path) return detail::error(403, "path escapes the document root");
    std::error_code ec;
    if (fs::is_directory(*path, ec)) *path /= "index.html";
    auto body = fs::is_regular_file(*path, ec) ? detail::read_file(*path) : std::nullopt;
    if (!body) return detail::error(404, "not found");
    r = {200, detail::content_type_for(*path), std::move(*body)};
    filter_path = path->filename().string();
  }
  return apply_filter(ctx, std::move(r), filter_path);
}

// `<epoch> <client-ip> "<request-line>" <status> <bytes>`
inline std::string access_log_line(std::int64_t epoch, std::string_view ip, std::string_view request_line,
                                   int status, std::size_t bytes) {
  return std::to_string(epoch) + " " + std::string(ip) + " \"" + std::string(request_line) + "\" " +
         std::to_string(status) + " " + std::to_string(bytes);
}

class Server {
 public:
  explicit Server(Context ctx) : ctx_(std::move(ctx)) {
    if (ctx_.cfg.http_logfile) {
      log_.open(*ctx_.cfg.http_logfile, std::ios::app);
      if (!log_) spdlog::error("cannot open http log {}", ctx_.cfg.http_logfile->string());
    }
    svr_.set_keep_alive_max_count(1);
    svr_.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    auto handler = [this](const httplib::Request& req, httplib::Response& res) { serve(req, res); };
    svr_.Get(".*", handler);
    svr_.Post(".*", handler);
    svr_.Put(".*", handler);
    svr_.Delete(".*", handler);
    svr_.Patch(".*", handler);
    svr_.Options(".*", handler);
  }

  // Throws std::system_error when the port cannot be bound.
  int bind(const std::string& host, int port) {
    if (port == 0) {
      port = svr_.bind_to_any_port(host);
      if (port < 0) throw std::system_error(EADDRINUSE, std::generic_category(), "bind http port");
    } else if (!svr_.bind_to_port(host, port)) {
      throw std::system_error(EADDRINUSE, std::generic_category(), "bind http port " + std::to_string(port));
    }
    port_ = port;
    return port;
  }

  int port() const noexcept { return port_; }

  // Blocks serving requests until stop().
  void run() { svr_.listen_after_bind(); }
  void stop() { svr_.stop(); }
  void wait_until_ready() const { svr_.wait_until_ready(); }

 private:
  void serve(const httplib::Request& req, httplib::Response& res) {
    auto r = handle_request(ctx_, req.method, req.target);
    res.status = r.status;
    if (r.status == 405) res.set_header("Allow", "GET, HEAD");
    res.set_content(std::move(r.body), r.content_type);
    if (log_.is_open()) {
      auto line = access_log_line(ctx_.now(), req.remote_addr, req.method + " " + req.target + " " + req.version,
                                  res.status, res.body.size());
      std::lock_guard lock(log_mu_);
      log_ << line << '\n' << std::flush;
    }
  }

  Context ctx_;
  httplib::Server svr_;
  int port_ = 0;
  std::mutex log_mu_;
  std::ofstream log_;
};

}  // namespace farmwatch::http
