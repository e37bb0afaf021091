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

#include <filesystem>
#include <random>

#include "farmwatch/config.hpp"

using namespace farmwatch;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(FARMWATCH_TEST_DIR) / "fixtures";

constexpr const char* kMinimal =
    R"(<monitor><host name="h" polldelay="30"><miblist/><archives/><graphs/></host></monitor>)";

Diagnostic::Kind error_kind(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "document was accepted: " << text;
  return Diagnostic::Kind::IoError;
}

std::string host_doc(std::string_view host_attrs, std::string_view body) {
  return "<monitor><host " + std::string(host_attrs) + ">" + std::string(body) + "</host></monitor>";
}

}  // namespace

TEST(Config, MinimalDocumentDefaults) {
  auto cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.http_port, 8001);
  EXPECT_EQ(cfg.num_connections, 50);
  ASSERT_EQ(cfg.hosts.size(), 1u);
  EXPECT_EQ(cfg.hosts[0].snmp_version, snmp::Version::V2c);
  EXPECT_EQ(cfg.hosts[0].ip, "h");
  EXPECT_EQ(cfg.hosts[0].polldelay, 30);
}

// Every monitor attribute, one row each.
TEST(Config, MonitorAttributeDefaults) {
  auto cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.num_connections, 50);             // pmc-num-connections
  EXPECT_FALSE(cfg.pmc_logfile.has_value());      // pmc-logfile
  EXPECT_EQ(cfg.verbosity, 3);                    // pmc-verbosity
  EXPECT_EQ(cfg.rrd_dir, fs::path("."));          // pmc-rrd-dir
  EXPECT_EQ(cfg.xslt_dir, fs::path("."));         // pmc-xslt-dir
  EXPECT_EQ(cfg.html_dir, fs::path("."));         // http-html-dir
  EXPECT_EQ(cfg.http_port, 8001);                 // http-port
  EXPECT_FALSE(cfg.http_logfile.has_value());     // http-logfile
  EXPECT_FALSE(cfg.http_filter.has_value());      // http-filter
  EXPECT_TRUE(cfg.http_filter_extensions.empty());  // http-filter-extensions
}

TEST(Config, ElementDefaults) {
  auto cfg = parse_config(host_doc(R"(name="n1" polldelay="10")",
                                   R"(<miblist><mib id="a" name="sysUpTime.0"/></miblist>)"
                                   R"(<archives><rra granularity="10" expire="100"/></archives>)"
                                   R"(<graphs><rrdgraph id="g.png" title="t"><line>DEF:x=a:AVERAGE</line>)"
                                   R"(<line>LINE1:x#000000</line></rrdgraph></graphs>)"));
  const auto& h = cfg.hosts.at(0);
  EXPECT_EQ(h.ip, "n1");
  EXPECT_TRUE(h.tags.empty());
  EXPECT_EQ(h.snmp_version, snmp::Version::V2c);
  EXPECT_FALSE(h.description.has_value());
  EXPECT_FALSE(h.mailto.has_value());

  const auto& m = h.mibs.at(0);
  EXPECT_EQ(m.kind, VarKind::Gauge);
  EXPECT_EQ(m.community, "public");
  EXPECT_FALSE(m.min.has_value());
  EXPECT_FALSE(m.max.has_value());

  const auto& r = h.rras.at(0);
  EXPECT_EQ(r.cf, ConsolidationFn::Average);
  EXPECT_DOUBLE_EQ(r.xff, 0.8);

  const auto& g = h.graphs.at(0);
  EXPECT_EQ(g.width, 400);
  EXPECT_EQ(g.height, 180);
  EXPECT_EQ(g.seconds, "-3h");
}

TEST(Config, FixtureParses) {
  auto cfg = load_config(kFixtures / "farm.xml");
  EXPECT_EQ(cfg.num_connections, 20);
  EXPECT_EQ(cfg.verbosity, 1);
  EXPECT_EQ(cfg.http_port, 8080);
  EXPECT_EQ(cfg.rrd_dir, (kFixtures / "rrd").lexically_normal());
  EXPECT_EQ(cfg.http_filter, "cat");
  EXPECT_EQ(cfg.http_filter_extensions, (std::vector<std::string>{".html", ".php"}));
  ASSERT_EQ(cfg.hosts.size(), 2u);

  const auto& h = cfg.hosts[0];
  EXPECT_EQ(h.ip, "10.0.0.2");
  EXPECT_EQ(h.tags, (std::vector<std::string>{"farm1", "client"}));
  EXPECT_EQ(h.description, "Worker node in rack 1");
  EXPECT_EQ(h.mailto, "ops@example.org");
  ASSERT_EQ(h.mibs.size(), 4u);
  EXPECT_EQ(h.mibs[0].oid, snmp::parse_oid(".1.3.6.1.2.1.1.3.0"));
  EXPECT_EQ(h.mibs[1].kind, VarKind::Counter);
  EXPECT_EQ(h.mibs[1].min, 0.0);
  EXPECT_EQ(h.mibs[3].community, "private");
  ASSERT_EQ(h.rras.size(), 2u);
  EXPECT_EQ(h.rras[1].cf, ConsolidationFn::Max);
  EXPECT_DOUBLE_EQ(h.rras[1].xff, 0.5);
  ASSERT_EQ(h.graphs.size(), 1u);
  EXPECT_EQ(h.graphs[0].lines.size(), 3u);

  EXPECT_EQ(cfg.hosts[1].snmp_version, snmp::Version::V1);
  EXPECT_TRUE(cfg.hosts[1].mibs.empty());
}

TEST(Config, TagsSplitOnSpacesAndCommas) {
  auto cfg = parse_config(host_doc(R"(name="h" polldelay="5" tag="a, b  c,d")", "<miblist/><archives/><graphs/>"));
  EXPECT_EQ(cfg.hosts[0].tags, (std::vector<std::string>{"a", "b", "c", "d"}));
}

TEST(Config, Rejections) {
  EXPECT_EQ(error_kind("<monitor><host"), Diagnostic::Kind::WellFormedness);
  EXPECT_EQ(error_kind(R"(<monitor><host name="h"><miblist/><archives/><graphs/></host></monitor>)"),
            Diagnostic::Kind::SchemaViolation);
  EXPECT_EQ(error_kind(R"(<monitor><host name="a" polldelay="5"><miblist/><archives/><graphs/></host>)"
                       R"(<host name="a" polldelay="5"><miblist/><archives/><graphs/></host></monitor>)"),
            Diagnostic::Kind::DuplicateId);
  EXPECT_EQ(error_kind(host_doc(R"(name="h" polldelay="soon")", "<miblist/><archives/><graphs/>")),
            Diagnostic::Kind::BadValue);
  EXPECT_EQ(error_kind(host_doc(R"(name="h" polldelay="5")",
                                R"(<miblist/><archives><rra xff="1.5" granularity="5" expire="50"/></archives><graphs/>)")),
            Diagnostic::Kind::BadValue);
  // order is description?, mailto?, miblist, archives, graphs
  EXPECT_EQ(error_kind(host_doc(R"(name="h" polldelay="5")", "<archives/><miblist/><graphs/>")),
            Diagnostic::Kind::SchemaViolation);
  EXPECT_EQ(error_kind(host_doc(R"(name="h" polldelay="5")", "<miblist/><archives/>")),
            Diagnostic::Kind::SchemaViolation);
  EXPECT_EQ(error_kind(host_doc(R"(name="h" polldelay="5" snmpversion="3")", "<miblist/><archives/><graphs/>")),
            Diagnostic::Kind::SchemaViolation);
  EXPECT_EQ(error_kind(host_doc(R"(name="h" polldelay="5")",
                                R"(<miblist><mib id="a" name="sysUpTime.0" type="RATE"/></miblist><archives/><graphs/>)")),
            Diagnostic::Kind::SchemaViolation);
  EXPECT_EQ(error_kind(host_doc(R"(name="h" polldelay="5")",
                                R"(<miblist><mib id="a" name="sysUpTime.0"/><mib id="a" name="sysName.0"/></miblist>)"
                                "<archives/><graphs/>")),
            Diagnostic::Kind::DuplicateId);
  EXPECT_EQ(error_kind(host_doc(R"(name="h" polldelay="30")",
                                R"(<miblist/><archives><rra granularity="45" expire="450"/></archives><graphs/>)")),
            Diagnostic::Kind::SchemaViolation);
  EXPECT_EQ(error_kind(R"(<monitor http-port="70000">)"
                       R"(<host name="h" polldelay="5"><miblist/><archives/><graphs/></host></monitor>)"),
            Diagnostic::Kind::BadValue);
  EXPECT_EQ(error_kind(R"(<monitor colour="red">)"
                       R"(<host name="h" polldelay="5"><miblist/><archives/><graphs/></host></monitor>)"),
            Diagnostic::Kind::SchemaViolation);
  EXPECT_EQ(error_kind("<monitor/>"), Diagnostic::Kind::SchemaViolation);
  EXPECT_EQ(error_kind(host_doc(R"(name="h" polldelay="5")",
                                "<miblist/><archives/><graphs>"
                                R"(<rrdgraph id="g.png" title="t"><line>DEF:x=nope:AVERAGE</line></rrdgraph>)"
                                "</graphs>")),
            Diagnostic::Kind::BadValue);
}

TEST(Config, DiagnosticsCarryLineAndContext) {
  auto diags = check_config(kFixtures / "bad_xff.xml");
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].kind, Diagnostic::Kind::BadValue);
  EXPECT_EQ(diags[0].context, "rra@xff");
  EXPECT_EQ(diags[0].line, 15);
}

TEST(Config, CheckValidFixtureIsClean) { EXPECT_TRUE(check_config(kFixtures / "farm.xml").empty()); }

TEST(Config, CheckUnreadablePathIsIoError) {
  try {
    check_config(kFixtures / "does-not-exist.xml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.kind(), Diagnostic::Kind::IoError);
  }
}

TEST(Config, ReportsEveryError) {
  auto cfg_text = host_doc(R"(name="h" polldelay="5" bogus="1")",
                           R"(<miblist><mib id="a" name="foo.bar"/></miblist>)"
                           R"(<archives><rra xff="2" granularity="5" expire="50"/></archives><graphs/>)");
  MonitorConfig out;
  auto diags = config_detail::validate(cfg_text, {}, out);
  EXPECT_EQ(diags.size(), 3u);
}

TEST(ConfigProperty, SerializeIsAFixpoint) {
  auto cfg = load_config(kFixtures / "farm.xml");
  auto again = parse_config(serialize_config(cfg));
  EXPECT_EQ(again, cfg);
  EXPECT_EQ(serialize_config(again), serialize_config(cfg));
  auto minimal = parse_config(kMinimal);
  EXPECT_EQ(parse_config(serialize_config(minimal)), minimal);
}

TEST(ConfigProperty, RandomConfigsRoundTrip) {
  std::mt19937_64 rng(99);
  const char* names[] = {"sysUpTime.0", ".1.3.6.1.2.1.2.2.1.10.1", "laLoad.2", "memTotalReal.0", "ifOutOctets.3"};
  const char* kinds[] = {"GAUGE", "DERIVE", "COUNTER"};
  const char* cfs[] = {"AVERAGE", "MIN", "MAX", "LAST"};
  for (int iter = 0; iter < 200; ++iter) {
    std::string doc = "<monitor pmc-num-connections=\"" + std::to_string(1 + rng() % 100) + "\" http-port=\"" +
                      std::to_string(1024 + rng() % 5000) + "\">";
    int hosts = 1 + static_cast<int>(rng() % 4);
    for (int h = 0; h < hosts; ++h) {
      int pd = 5 * static_cast<int>(1 + rng() % 6);
      doc += "<host name=\"h" + std::to_string(h) + "\" polldelay=\"" + std::to_string(pd) + "\"";
      if (rng() % 2) doc += " tag=\"t" + std::to_string(rng() % 3) + ",x\"";
      if (rng() % 2) doc += " snmpversion=\"1\"";
      doc += ">";
      if (rng() % 2) doc += "<description>d &amp; &lt;" + std::to_string(h) + "&gt;</description>";
      doc += "<miblist>";
      int mibs = static_cast<int>(rng() % 4);
      for (int m = 0; m < mibs; ++m) {
        doc += "<mib id=\"m" + std::to_string(m) + "\" name=\"" + names[rng() % 5] + "\" type=\"" +
               kinds[rng() % 3] + "\"";
        if (rng() % 2) doc += " min=\"" + std::to_string(-static_cast<int>(rng() % 50)) + ".25\"";
        if (rng() % 2) doc += " max=\"1e" + std::to_string(rng() % 12) + "\"";
        doc += "/>";
      }
      doc += "</miblist><archives>";
      int rras = static_cast<int>(rng() % 3);
      for (int r = 0; r < rras; ++r) {
        std::int64_t g = pd * static_cast<std::int64_t>(1 + rng() % 20);
        doc += "<rra cf=\"" + std::string(cfs[rng() % 4]) + "\" xff=\"0." + std::to_string(rng() % 10) +
               "\" granularity=\"" + std::to_string(g) + "\" expire=\"" + std::to_string(g * (1 + rng() % 500)) +
               "\"/>";
      }
      doc += "</archives><graphs>";
      if (mibs > 0 && rng() % 2) {
        doc += "<rrdgraph id=\"g.svg\" title=\"T &quot;q&quot;\" width=\"300\"><line>DEF:v=m0:AVERAGE</line>"
               "<line>AREA:v#00FF00:area</line></rrdgraph>";
      }
      doc += "</graphs></host>";
    }
    doc += "</monitor>";
    auto cfg = parse_config(doc);
    ASSERT_EQ(parse_config(serialize_config(cfg)), cfg) << doc;
  }
}
