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

#include <gtest/gtest.h>
#include <httplib.h>
#include <png.h>

#include <random>
#include <regex>
#include <thread>

#include "farmwatch/agent_sim.hpp"
#include "farmwatch/archive_store.hpp"
#include "farmwatch/collector.hpp"
#include "farmwatch/http.hpp"
#include "scratch.hpp"

using namespace farmwatch;
using farmwatch::testing::ScratchDir;
namespace fs = std::filesystem;

namespace {

constexpr std::int64_t kNow = 1700000000;

const char* kConfig = R"(<?xml version="1.0"?>
<monitor>
  <host name="localhost" ip="127.0.0.1" polldelay="60">
    <miblist>
      <mib id="load1" name=".1.3.6.1.4.1.2021.10.1.5.1"/>
    </miblist>
    <archives>
      <rra cf="AVERAGE" granularity="60" expire="1209600"/>
    </archives>
    <graphs>
      <rrdgraph id="cpu.png" title="load">
        <line>DEF:c=load1:AVERAGE</line>
        <line>LINE2:c#FF0000:load</line>
      </rrdgraph>
      <rrdgraph id="cpu.svg" title="" width="300" height="100" seconds="-1h">
        <line>DEF:c=load1:AVERAGE</line>
        <line>AREA:c#00FF00:load</line>
      </rrdgraph>
    </graphs>
  </host>
  <host name="node2" ip="10.0.0.2" polldelay="60"><miblist/><archives/><graphs/></host>
  <host name="node3" ip="10.0.0.3" polldelay="60"><miblist/><archives/><graphs/></host>
</monitor>
)";

const char* kIdentity = R"xsl(<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
  <xsl:template match="@*|node()"><xsl:copy><xsl:apply-templates select="@*|node()"/></xsl:copy></xsl:template>
</xsl:stylesheet>
)xsl";

const char* kCount = R"xsl(<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
  <xsl:output method="text"/>
  <xsl:template match="/"><xsl:value-of select="count(/hosts/host)"/></xsl:template>
</xsl:stylesheet>
)xsl";

const char* kOk = R"xsl(<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform">
  <xsl:output method="text"/>
  <xsl:template match="/">ok</xsl:template>
</xsl:stylesheet>
)xsl";

// Three hosts, four hours of load samples on localhost, scratch html and
// xslt directories.
struct Fixture {
  ScratchDir dir{"http"};
  MonitorConfig cfg;
  std::unique_ptr<StatusView> status;
  std::unique_ptr<ArchiveStore> archives;

  Fixture() {
    cfg = parse_config(kConfig);
    cfg.html_dir = dir / "html";
    cfg.xslt_dir = dir / "xslt";
    cfg.rrd_dir = dir / "rrd";
    dir.write("html/index.html", "<p>home</p>");
    dir.write("html/page.html", "hello page");
    dir.write("html/notes.txt", "plain notes");
    dir.write("html/sub/deep.html", "deep");
    dir.write("secret.txt", "TOP-SECRET");
    dir.write("xslt/identity.xsl", kIdentity);
    dir.write("xslt/count.xsl", kCount);
    dir.write("xslt/ok.xsl", kOk);
    fs::create_symlink(dir / "secret.txt", dir / "html/leak.txt");
    fs::create_directory_symlink(dir.path(), dir / "html/up");
    status = std::make_unique<StatusView>(cfg);
    archives = std::make_unique<ArchiveStore>(cfg, kNow - 5 * 3600, false);
    for (std::int64_t t = kNow - 4 * 3600; t <= kNow; t += 60) {
      archives->update(0, cfg.hosts[0], static_cast<double>(t),
                       {{"load1", 1.0 + std::sin(static_cast<double>(t) / 900.0)}});
    }
    PollResult r;
    r.host = "localhost";
    r.time = kNow;
    status->apply_poll_result(r, {{"load1", 1.5}});
  }

  http::Context context(std::string xslt = farmwatch::testing::lxml_command()) const {
    http::Context ctx{cfg, *status, *archives, std::move(xslt)};
    ctx.now = [] { return kNow; };
    return ctx;
  }
};

std::pair<std::uint32_t, std::uint32_t> png_size(const std::string& bytes) {
  auto be32 = [&](std::size_t at) {
    return (std::uint32_t(std::uint8_t(bytes[at])) << 24) | (std::uint32_t(std::uint8_t(bytes[at + 1])) << 16) |
           (std::uint32_t(std::uint8_t(bytes[at + 2])) << 8) | std::uint32_t(std::uint8_t(bytes[at + 3]));
  };
  if (bytes.size() < 24 || bytes.compare(1, 3, "PNG") != 0) return {0, 0};
  return {be32(16), be32(20)};
}

// Drops the declaration and whitespace between tags.
std::string normalize_xml(std::string s) {
  s = std::regex_replace(s, std::regex(R"(<\?xml[^>]*\?>)"), "");
  s = std::regex_replace(s, std::regex(R"(>\s+<)"), "><");
  return std::regex_replace(s, std::regex(R"(^\s+|\s+$)"), "");
}

#define REQUIRE_XSLT()                                                      \
  if (!farmwatch::testing::lxml_available()) {                              \
    GTEST_SKIP() << "no XSLT processor available (python3 lxml missing)"; \
  }

}  // namespace

TEST(HttpQuery, SplitsOnAmpersandAndSemicolon) {
  auto q = http::parse_query("width=320;height=200&start=-3h");
  ASSERT_TRUE(q);
  ASSERT_EQ(q->size(), 3u);
  EXPECT_EQ(*http::find_param(*q, "height"), "200");
  EXPECT_EQ(*http::find_param(*q, "start"), "-3h");
  EXPECT_EQ(http::find_param(*q, "Width"), nullptr);
}

TEST(HttpQuery, PercentDecoding) {
  EXPECT_EQ(http::percent_decode("a%20b", false), "a b");
  EXPECT_EQ(http::percent_decode("a+b", true), "a b");
  EXPECT_EQ(http::percent_decode("a+b", false), "a+b");
  EXPECT_FALSE(http::percent_decode("%zz", false));
  EXPECT_FALSE(http::percent_decode("%4", false));
}

TEST(HttpRoute, GraphUri) {
  Fixture f;
  auto r = http::resolve_route("GET", "/localhost/cpu.png?width=320&height=200&start=-3h", f.cfg);
  auto* g = std::get_if<http::route::Graph>(&r);
  ASSERT_TRUE(g);
  EXPECT_EQ(g->host, "localhost");
  EXPECT_EQ(g->graph, "cpu.png");
  EXPECT_EQ(*http::find_param(g->query, "width"), "320");
  EXPECT_EQ(*http::find_param(g->query, "height"), "200");
  EXPECT_EQ(*http::find_param(g->query, "start"), "-3h");
}

TEST(HttpRoute, StatusUris) {
  Fixture f;
  EXPECT_EQ(http::resolve_route("GET", "/status.html?applyTransform=view.xsl", f.cfg),
            http::Route(http::route::ClusterStatus{"view.xsl"}));
  EXPECT_EQ(http::resolve_route("GET", "/status.html", f.cfg), http::Route(http::route::ClusterStatus{}));
  EXPECT_EQ(http::resolve_route("GET", "/node2/status.html?applyTransform=v.xsl", f.cfg),
            http::Route(http::route::HostStatus{"node2", "v.xsl"}));
  EXPECT_EQ(http::resolve_route("HEAD", "/node2/status.html", f.cfg),
            http::Route(http::route::HostStatus{"node2", std::nullopt}));
}

TEST(HttpRoute, Errors) {
  Fixture f;
  auto status_of = [&](std::string_view m, std::string_view t) {
    auto r = http::resolve_route(m, t, f.cfg);
    auto* e = std::get_if<http::route::Error>(&r);
    return e ? e->status : 0;
  };
  EXPECT_EQ(status_of("GET", "/../etc/passwd"), 403);
  EXPECT_EQ(status_of("GET", "/%2e%2e/etc/passwd"), 403);
  EXPECT_EQ(status_of("GET", "/a%2f..%2f..%2fsecret.txt"), 403);
  EXPECT_EQ(status_of("GET", "/status.html?applyTransform=../x.xsl"), 403);
  EXPECT_EQ(status_of("GET", "/status.html?applyTransform=a%2fb.xsl"), 403);
  EXPECT_EQ(status_of("POST", "/"), 405);
  EXPECT_EQ(status_of("DELETE", "/status.html"), 405);
  EXPECT_EQ(status_of("GET", "/localhost/nosuch.png"), 404);
}

TEST(HttpRoute, StaticFallback) {
  Fixture f;
  EXPECT_EQ(http::resolve_route("GET", "/", f.cfg), http::Route(http::route::StaticFile{{"index.html"}}));
  EXPECT_EQ(http::resolve_route("GET", "/sub/deep.html", f.cfg),
            http::Route(http::route::StaticFile{{"sub", "deep.html"}}));
  EXPECT_EQ(http::resolve_route("GET", "/unknownhost/cpu.png", f.cfg),
            http::Route(http::route::StaticFile{{"unknownhost", "cpu.png"}}));
}

TEST(HttpGraph, DefaultsFromConfig) {
  Fixture f;
  auto ctx = f.context();
  auto r = http::handle_request(ctx, "GET", "/localhost/cpu.png");
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.content_type, "image/png");
  EXPECT_EQ(png_size(r.body), std::make_pair(400u, 180u));

  // Same bytes as rendering the default window directly.
  grapher::RenderRequest req;
  req.start = kNow - 3 * 3600;
  req.end = kNow;
  req.title = "load";
  auto img = grapher::render(f.cfg.hosts[0].graphs[0].program, *f.archives->snapshot(0), req, grapher::Format::Png);
  EXPECT_EQ(r.body, std::string(img.bytes.begin(), img.bytes.end()));
}

TEST(HttpGraph, QueryOverrides) {
  Fixture f;
  auto ctx = f.context();
  auto r = http::handle_request(ctx, "GET", "/localhost/cpu.png?width=320&height=200&start=-3h");
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(png_size(r.body), std::make_pair(320u, 200u));
  auto partial = http::handle_request(ctx, "GET", "/localhost/cpu.png?height=90");
  EXPECT_EQ(png_size(partial.body), std::make_pair(400u, 90u));
}

TEST(HttpGraph, OneWeekWindow) {
  Fixture f;
  auto ctx = f.context();
  auto r = http::handle_request(ctx, "GET", "/localhost/cpu.svg?start=-1w");
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.content_type, "image/svg+xml");
  grapher::RenderRequest req;
  req.width = 300;
  req.height = 100;
  req.start = kNow - 7 * 86400;
  req.end = kNow;
  auto img = grapher::render(f.cfg.hosts[0].graphs[1].program, *f.archives->snapshot(0), req, grapher::Format::Svg);
  EXPECT_EQ(r.body, std::string(img.bytes.begin(), img.bytes.end()));
  auto one_hour = http::handle_request(ctx, "GET", "/localhost/cpu.svg");
  EXPECT_NE(one_hour.body, r.body);
}

TEST(HttpGraph, BadQueries) {
  Fixture f;
  auto ctx = f.context();
  EXPECT_EQ(http::handle_request(ctx, "GET", "/localhost/cpu.png?width=abc").status, 400);
  EXPECT_EQ(http::handle_request(ctx, "GET", "/localhost/cpu.png?height=12x").status, 400);
  EXPECT_EQ(http::handle_request(ctx, "GET", "/localhost/cpu.png?width=10").status, 400);
  EXPECT_EQ(http::handle_request(ctx, "GET", "/localhost/cpu.png?start=yesterday").status, 400);
  EXPECT_EQ(http::handle_request(ctx, "GET", "/localhost/cpu.png?start=%zz").status, 400);
  auto unknown = http::handle_request(ctx, "GET", "/nosuchhost/status.html");
  EXPECT_EQ(unknown.status, 404);
  EXPECT_EQ(unknown.content_type, "text/plain");
}

TEST(HttpStatus, RawDocumentMatchesSerializer) {
  Fixture f;
  auto ctx = f.context();
  auto r = http::handle_request(ctx, "GET", "/status.html");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.content_type, "text/xml");
  EXPECT_EQ(r.body, serialize_status_xml(*f.status->snapshot()));
  auto h = http::handle_request(ctx, "GET", "/localhost/status.html");
  EXPECT_EQ(h.body, serialize_status_xml(*f.status->snapshot()->find("localhost")));
}

TEST(HttpTransform, IdentityReturnsDocument) {
  REQUIRE_XSLT();
  Fixture f;
  auto ctx = f.context();
  auto r = http::handle_request(ctx, "GET", "/status.html?applyTransform=identity.xsl");
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.content_type, "text/html");
  EXPECT_EQ(normalize_xml(r.body), normalize_xml(serialize_status_xml(*f.status->snapshot())));
}

TEST(HttpTransform, CountsHosts) {
  REQUIRE_XSLT();
  Fixture f;
  auto ctx = f.context();
  EXPECT_EQ(http::handle_request(ctx, "GET", "/status.html?applyTransform=count.xsl").body, "3");
  EXPECT_EQ(http::handle_request(ctx, "GET", "/node3/status.html?applyTransform=count.xsl").body, "1");
}

TEST(HttpTransform, Failures) {
  Fixture f;
  auto ctx = f.context();
  EXPECT_EQ(http::handle_request(ctx, "GET", "/status.html?applyTransform=missing.xsl").status, 404);
  auto broken = f.context("sh -c 'echo boom >&2; exit 3' {}");
  EXPECT_EQ(http::handle_request(broken, "GET", "/status.html?applyTransform=identity.xsl").status, 500);
}

TEST(HttpFilter, AppliesByExtensionOnly) {
  REQUIRE_XSLT();
  Fixture f;
  auto plain = f.context();
  auto png_before = http::handle_request(plain, "GET", "/localhost/cpu.png").body;
  f.cfg.http_filter = "tr a-z A-Z";
  f.cfg.http_filter_extensions = {".html"};
  auto ctx = f.context();
  EXPECT_EQ(http::handle_request(ctx, "GET", "/status.html?applyTransform=ok.xsl").body, "OK");
  EXPECT_EQ(http::handle_request(ctx, "GET", "/page.html").body, "HELLO PAGE");
  EXPECT_EQ(http::handle_request(ctx, "GET", "/notes.txt").body, "plain notes");
  EXPECT_EQ(http::handle_request(ctx, "GET", "/localhost/cpu.png").body, png_before);
}

TEST(HttpFilter, EmptyListMeansNever) {
  Fixture f;
  f.cfg.http_filter = "tr a-z A-Z";
  auto ctx = f.context();
  EXPECT_EQ(http::handle_request(ctx, "GET", "/page.html").body, "hello page");
  f.cfg.http_filter.reset();
  f.cfg.http_filter_extensions = {".html"};
  EXPECT_EQ(http::handle_request(ctx, "GET", "/page.html").body, "hello page");
}

TEST(HttpFilter, FailureIs500AndErrorsPassThrough) {
  Fixture f;
  f.cfg.http_filter = "exit 7";
  f.cfg.http_filter_extensions = {".html"};
  auto ctx = f.context();
  EXPECT_EQ(http::handle_request(ctx, "GET", "/page.html").status, 500);
  EXPECT_EQ(http::handle_request(ctx, "GET", "/missing.html").status, 404);
}

TEST(HttpStatic, ServesFilesInsideRoot) {
  Fixture f;
  auto ctx = f.context();
  auto idx = http::handle_request(ctx, "GET", "/");
  EXPECT_EQ(idx.status, 200);
  EXPECT_EQ(idx.body, "<p>home</p>");
  EXPECT_EQ(idx.content_type, "text/html");
  EXPECT_EQ(http::handle_request(ctx, "GET", "/sub/").status, 404);
  EXPECT_EQ(http::handle_request(ctx, "GET", "/sub/deep.html").body, "deep");
  EXPECT_EQ(http::handle_request(ctx, "GET", "/leak.txt").status, 403);
  EXPECT_EQ(http::handle_request(ctx, "GET", "/up/secret.txt").status, 403);
  EXPECT_EQ(http::handle_request(ctx, "GET", "/nope.html").status, 404);
}

// Random paths built from hostile pieces never reach a file outside html_dir.
TEST(HttpStatic, AdversarialPathsStayInsideRoot) {
  Fixture f;
  auto ctx = f.context();
  const std::vector<std::string> pieces = {"..",   "%2e%2e", ".",        "%2e",     "%2f",  "%5c",      "sub",
                                           "up",   "leak.txt", "secret.txt", "%00", "",     "..%2f..",  "page.html",
                                           "%252e", "\\..", "index.html", "//",   "%2F..%2F"};
  std::mt19937_64 rng(11);
  for (int i = 0; i < 3000; ++i) {
    std::string target;
    int n = 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) target += "/" + pieces[rng() % pieces.size()];
    auto r = http::handle_request(ctx, "GET", target);
    EXPECT_EQ(r.body.find("TOP-SECRET"), std::string::npos) << target;
    if (r.status == 200) {
      static const std::set<std::string> inside = {"<p>home</p>", "hello page", "plain notes", "deep"};
      EXPECT_TRUE(inside.count(r.body)) << target;
    } else {
      EXPECT_TRUE(r.status == 400 || r.status == 403 || r.status == 404) << target << " -> " << r.status;
    }
  }
}

TEST(HttpServer, RequestsDoNotMutateState) {
  REQUIRE_XSLT();
  Fixture f;
  auto ctx = f.context();
  auto status_before = f.status->snapshot();
  auto db_before = f.archives->snapshot(0);
  auto bytes_before = db_before->serialize();
  auto cfg_before = f.cfg;
  for (const char* t : {"/status.html", "/localhost/cpu.png?start=-1w", "/status.html?applyTransform=identity.xsl",
                        "/localhost/status.html", "/page.html", "/localhost/cpu.svg"}) {
    http::handle_request(ctx, "GET", t);
  }
  EXPECT_EQ(f.status->snapshot(), status_before);
  EXPECT_EQ(f.archives->snapshot(0), db_before);
  EXPECT_EQ(db_before->serialize(), bytes_before);
  EXPECT_EQ(f.cfg, cfg_before);
}

TEST(HttpServer, LiveEndpoints) {
  Fixture f;
  f.cfg.http_logfile = f.dir / "access.log";
  http::Server server(f.context());
  int port = server.bind("127.0.0.1", 0);
  std::thread t([&] { server.run(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto st = cli.Get("/status.html");
  ASSERT_TRUE(st);
  EXPECT_EQ(st->status, 200);
  EXPECT_EQ(st->get_header_value("Connection"), "close");
  EXPECT_EQ(st->body, serialize_status_xml(*f.status->snapshot()));
  auto post = cli.Post("/", "x", "text/plain");
  ASSERT_TRUE(post);
  EXPECT_EQ(post->status, 405);
  auto unknown = cli.Get("/nohost/status.html");
  ASSERT_TRUE(unknown);
  EXPECT_EQ(unknown->status, 404);
  EXPECT_EQ(unknown->get_header_value("Content-Type"), "text/plain");
  auto graph = cli.Get("/localhost/cpu.png?width=320&height=200");
  ASSERT_TRUE(graph);
  EXPECT_EQ(png_size(graph->body), std::make_pair(320u, 200u));

  server.stop();
  t.join();

  auto log = farmwatch::testing::read_file(*f.cfg.http_logfile);
  std::istringstream lines(log);
  std::vector<std::string> v;
  for (std::string l; std::getline(lines, l);) v.push_back(l);
  ASSERT_EQ(v.size(), 4u);
  std::regex re(R"re(^(\d+) 127\.0\.0\.1 "([A-Z]+) (\S+) HTTP/1\.1" (\d{3}) (\d+)$)re");
  std::smatch m;
  ASSERT_TRUE(std::regex_match(v[0], m, re)) << v[0];
  EXPECT_EQ(m[1], std::to_string(kNow));
  EXPECT_EQ(m[3], "/status.html");
  EXPECT_EQ(m[4], "200");
  EXPECT_EQ(std::stoul(m[5]), st->body.size());
  ASSERT_TRUE(std::regex_match(v[1], m, re)) << v[1];
  EXPECT_EQ(m[2], "POST");
  EXPECT_EQ(m[4], "405");
  ASSERT_TRUE(std::regex_match(v[3], m, re)) << v[3];
  EXPECT_EQ(std::stoul(m[5]), graph->body.size());
}

TEST(HttpServer, BindFailureThrows) {
  Fixture f;
  http::Server a(f.context());
  int port = a.bind("127.0.0.1", 0);
  http::Server b(f.context());
  EXPECT_THROW(b.bind("127.0.0.1", port), std::system_error);
}

// Concurrent status and graph requests while the collector polls a farm.
TEST(HttpServer, StressDuringPolling) {
  ScratchDir dir("http_stress");
  auto farm = sim::spawn_farm(8, sim::table1_script(), 5);
  MonitorConfig cfg;
  cfg.rrd_dir = dir.path();
  cfg.html_dir = dir.path();
  cfg.xslt_dir = dir.path();
  cfg.hosts = farm->host_configs(1, {{ConsolidationFn::Average, 0.5, 1, 3600}});
  SystemClock clock;
  UdpTransport transport;
  ArchiveStore archives(cfg, clock.now(), false);
  StatusView status(cfg);
  Collector collector(cfg, clock, transport, {}, [&](std::size_t h, const PollResult& r, const ProcessedValues& p) {
    status.apply_poll_result(r, p);
    archives.update(h, cfg.hosts[h], r.time, p);
  });
  std::atomic<bool> stop{false};
  std::thread poller([&] { collector.run([&] { return !stop.load(); }); });

  http::Context ctx{cfg, status, archives};
  http::Server server(ctx);
  int port = server.bind("127.0.0.1", 0);
  std::thread srv([&] { server.run(); });
  server.wait_until_ready();

  std::atomic<int> ok{0}, failed{0};
  std::vector<std::thread> clients;
  for (int c = 0; c < 8; ++c) {
    clients.emplace_back([&, c] {
      httplib::Client cli("127.0.0.1", port);
      const std::string paths[] = {"/status.html", "/sim00" + std::to_string(c) + "/g.png?start=-2min",
                                   "/sim00" + std::to_string(c) + "/status.html", "/sim000/g.png"};
      for (int i = 0; i < 20; ++i) {
        auto res = cli.Get(paths[i % 4]);
        (res && res->status == 200 ? ok : failed)++;
      }
    });
  }
  for (auto& c : clients) c.join();
  stop = true;
  poller.join();
  server.stop();
  srv.join();
  EXPECT_EQ(failed.load(), 0);
  EXPECT_EQ(ok.load(), 160);
  EXPECT_GT(collector.stats().polls_completed.load(), 0u);
  EXPECT_EQ(collector.stats().timeouts.load(), 0u);
}
