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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "farmwatch/grapher/at_time.hpp"
#include "farmwatch/grapher/script.hpp"
#include "farmwatch/snmp/message.hpp"
#include "farmwatch/snmp/oid.hpp"
#include "farmwatch/types.hpp"
#include "farmwatch/xml.hpp"

namespace farmwatch {

struct MibSpec {
  std::string id;
  std::string name;  // as written: dotted-decimal or symbolic
  snmp::Oid oid;     // resolved form of `name`
  VarKind kind = VarKind::Gauge;
  std::string community = "public";
  std::optional<double> min;
  std::optional<double> max;
  friend bool operator==(const MibSpec&, const MibSpec&) = default;
};

struct RraSpec {
  ConsolidationFn cf = ConsolidationFn::Average;
  double xff = 0.8;  // minimum fraction of known PDPs for a known CDP
  std::int64_t granularity = 0;
  std::int64_t expire = 0;
  friend bool operator==(const RraSpec&, const RraSpec&) = default;
};

struct GraphSpec {
  std::string id;
  int width = 400;
  int height = 180;
  std::string seconds = "-3h";
  std::string title;
  std::vector<std::string> lines;
  grapher::GraphProgram program;
  friend bool operator==(const GraphSpec&, const GraphSpec&) = default;
};

struct HostConfig {
  std::string name;
  std::string ip;
  std::int64_t polldelay = 0;
  std::vector<std::string> tags;
  snmp::Version snmp_version = snmp::Version::V2c;
  std::optional<std::string> description;
  std::optional<std::string> mailto;  // stored, never acted on
  std::vector<MibSpec> mibs;
  std::vector<RraSpec> rras;
  std::vector<GraphSpec> graphs;

  const MibSpec* find_mib(std::string_view id) const {
    for (const auto& m : mibs) {
      if (m.id == id) return &m;
    }
    return nullptr;
  }
  const GraphSpec* find_graph(std::string_view id) const {
    for (const auto& g : graphs) {
      if (g.id == id) return &g;
    }
    return nullptr;
  }
  friend bool operator==(const HostConfig&, const HostConfig&) = default;
};

struct MonitorConfig {
  int num_connections = 50;
  std::optional<std::filesystem::path> pmc_logfile;
  int verbosity = 3;  // 0 = most verbose, 3 = silent
  std::filesystem::path rrd_dir = ".";
  std::filesystem::path xslt_dir = ".";
  std::filesystem::path html_dir = ".";
  int http_port = 8001;
  std::optional<std::filesystem::path> http_logfile;
  std::optional<std::string> http_filter;
  std::vector<std::string> http_filter_extensions;  // normalized to ".ext"
  std::vector<HostConfig> hosts;

  const HostConfig* find_host(std::string_view name) const {
    for (const auto& h : hosts) {
      if (h.name == name) return &h;
    }
    return nullptr;
  }
  friend bool operator==(const MonitorConfig&, const MonitorConfig&) = default;
};

struct Diagnostic {
  enum class Kind { WellFormedness, SchemaViolation, DuplicateId, BadValue, IoError };
  Kind kind;
  long line = 0;
  std::string context;  // element or element@attribute
  std::string message;

  std::string str() const {
    static constexpr const char* names[] = {"WellFormedness", "SchemaViolation", "DuplicateId", "BadValue",
                                            "IoError"};
    std::string out = "line " + std::to_string(line) + ": " + names[static_cast<int>(kind)];
    if (!context.empty()) out += " at <" + context + ">";
    return out + ": " + message;
  }
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<Diagnostic> diags)
      : std::runtime_error(diags.empty() ? "invalid configuration" : diags.front().str()), diags_(std::move(diags)) {}

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diags_; }
  Diagnostic::Kind kind() const { return diags_.front().kind; }

 private:
  std::vector<Diagnostic> diags_;
};

namespace config_detail {

using Kind = Diagnostic::Kind;

inline bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_' || c == ':' ||
         static_cast<unsigned char>(c) >= 0x80;
}

inline bool is_nmtoken(std::string_view s) { return !s.empty() && std::all_of(s.begin(), s.end(), is_name_char); }

inline bool is_xml_name(std::string_view s) {
  if (!is_nmtoken(s)) return false;
  char c = s.front();
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' || static_cast<unsigned char>(c) >= 0x80;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::optional<std::int64_t> to_int(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<double> to_real(std::string_view s) {
  s = trim(s);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::vector<std::string> split_tokens(std::string_view s, bool commas) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || (commas && c == ',')) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

class Validator {
 public:
  explicit Validator(std::filesystem::path base) : base_(std::move(base)) {}

  std::vector<Diagnostic> diags;

  void report(Kind kind, const xml::Element& e, std::string_view attr, std::string msg) {
    std::string ctx = e.name;
    if (!attr.empty()) ctx += "@" + std::string(attr);
    diags.push_back({kind, e.line, std::move(ctx), std::move(msg)});
  }

  // Flags undeclared attributes and returns false if any required one is missing.
  bool check_attributes(const xml::Element& e, std::initializer_list<std::string_view> allowed,
                        std::initializer_list<std::string_view> required) {
    for (const auto& [k, v] : e.attributes) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
        report(Kind::SchemaViolation, e, k, "undeclared attribute");
      }
    }
    bool ok = true;
    for (auto r : required) {
      if (!e.attribute(r)) {
        report(Kind::SchemaViolation, e, r, "required attribute missing");
        ok = false;
      }
    }
    return ok;
  }

  void check_no_text(const xml::Element& e) {
    if (!trim(e.text).empty()) report(Kind::SchemaViolation, e, "", "unexpected character data");
  }

  void check_empty(const xml::Element& e) {
    check_no_text(e);
    if (!e.children.empty()) report(Kind::SchemaViolation, e, "", "element must be empty");
  }

  std::filesystem::path resolve(std::string_view p) const {
    std::filesystem::path path(p);
    if (path.is_relative() && !base_.empty()) path = base_ / path;
    return path.lexically_normal();
  }

  template <typename T>
  std::optional<T> int_attr(const xml::Element& e, std::string_view name, std::int64_t lo, std::int64_t hi) {
    const auto* raw = e.attribute(name);
    if (!raw) return std::nullopt;
    auto v = to_int(*raw);
    if (!v || *v < lo || *v > hi) {
      report(Kind::BadValue, e, name,
             "'" + *raw + "' is not an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return std::nullopt;
    }
    return static_cast<T>(*v);
  }

  MonitorConfig monitor(const xml::Element& root) {
    MonitorConfig cfg;
    if (root.name != "monitor") {
      report(Kind::SchemaViolation, root, "", "root element must be <monitor>");
      return cfg;
    }
    check_attributes(root,
                     {"pmc-num-connections", "pmc-logfile", "pmc-verbosity", "pmc-rrd-dir", "pmc-xslt-dir",
                      "http-html-dir", "http-port", "http-logfile", "http-filter", "http-filter-extensions"},
                     {});
    if (auto v = int_attr<int>(root, "pmc-num-connections", 1, 1 << 20)) cfg.num_connections = *v;
    if (auto v = int_attr<int>(root, "pmc-verbosity", 0, 3)) cfg.verbosity = *v;
    if (auto v = int_attr<int>(root, "http-port", 1, 65535)) cfg.http_port = *v;
    if (const auto* v = root.attribute("pmc-logfile")) cfg.pmc_logfile = resolve(*v);
    if (const auto* v = root.attribute("http-logfile")) cfg.http_logfile = resolve(*v);
    cfg.rrd_dir = resolve(root.attribute("pmc-rrd-dir") ? *root.attribute("pmc-rrd-dir") : ".");
    cfg.xslt_dir = resolve(root.attribute("pmc-xslt-dir") ? *root.attribute("pmc-xslt-dir") : ".");
    cfg.html_dir = resolve(root.attribute("http-html-dir") ? *root.attribute("http-html-dir") : ".");
    if (const auto* v = root.attribute("http-filter")) {
      if (trim(*v).empty()) {
        report(Kind::BadValue, root, "http-filter", "empty filter command");
      } else {
        cfg.http_filter = *v;
      }
    }
    if (const auto* v = root.attribute("http-filter-extensions")) {
      for (auto& ext : split_tokens(*v, false)) {
        if (ext.front() != '.') ext.insert(ext.begin(), '.');
        cfg.http_filter_extensions.push_back(std::move(ext));
      }
    }
    check_no_text(root);

    for (const auto& child : root.children) {
      if (child.name != "host") {
        report(Kind::SchemaViolation, child, "", "<monitor> may only contain <host> elements");
        continue;
      }
      auto host = this->host(child);
      if (!host) continue;
      if (cfg.find_host(host->name)) {
        report(Kind::DuplicateId, child, "name", "host name '" + host->name + "' already used");
        continue;
      }
      cfg.hosts.push_back(std::move(*host));
    }
    if (root.children.empty()) report(Kind::SchemaViolation, root, "", "<monitor> needs at least one <host>");
    return cfg;
  }

  std::optional<HostConfig> host(const xml::Element& e) {
    std::size_t before = diags.size();
    HostConfig h;
    check_attributes(e, {"name", "ip", "polldelay", "tag", "snmpversion"}, {"name", "polldelay"});
    check_no_text(e);
    if (const auto* name = e.attribute("name")) {
      if (!is_xml_name(*name)) report(Kind::BadValue, e, "name", "'" + *name + "' is not a valid ID");
      h.name = *name;
    }
    h.ip = e.attribute("ip") ? *e.attribute("ip") : h.name;
    if (e.attribute("polldelay")) {
      if (auto v = int_attr<std::int64_t>(e, "polldelay", 1, 366LL * 86400)) h.polldelay = *v;
    }
    if (const auto* tag = e.attribute("tag")) {
      h.tags = split_tokens(*tag, true);
      for (const auto& t : h.tags) {
        if (!is_nmtoken(t)) report(Kind::BadValue, e, "tag", "'" + t + "' is not a name token");
      }
    }
    if (const auto* ver = e.attribute("snmpversion")) {
      if (*ver == "1") {
        h.snmp_version = snmp::Version::V1;
      } else if (*ver == "2c") {
        h.snmp_version = snmp::Version::V2c;
      } else {
        report(Kind::SchemaViolation, e, "snmpversion", "must be one of (1 | 2c), got '" + *ver + "'");
      }
    }

    // (description?, mailto?, miblist, archives, graphs)
    static constexpr std::string_view order[] = {"description", "mailto", "miblist", "archives", "graphs"};
    std::size_t next = 0;
    bool seen[5] = {};
    for (const auto& child : e.children) {
      std::size_t idx = 0;
      while (idx < 5 && order[idx] != child.name) ++idx;
      if (idx == 5) {
        report(Kind::SchemaViolation, child, "", "unexpected element inside <host>");
        continue;
      }
      if (idx < next || seen[idx]) {
        report(Kind::SchemaViolation, child, "", "element out of order; expected description?, mailto?, miblist, archives, graphs");
        continue;
      }
      seen[idx] = true;
      next = idx + 1;
      switch (idx) {
        case 0:
          if (!child.children.empty()) report(Kind::SchemaViolation, child, "", "character data only");
          h.description = child.text;
          break;
        case 1:
          if (!child.children.empty()) report(Kind::SchemaViolation, child, "", "character data only");
          h.mailto = child.text;
          break;
        case 2: miblist(child, h); break;
        case 3: archives(child, h); break;
        case 4: graphs(child, h); break;
      }
    }
    for (std::size_t idx = 2; idx < 5; ++idx) {
      if (!seen[idx]) report(Kind::SchemaViolation, e, "", "missing <" + std::string(order[idx]) + ">");
    }
    if (diags.size() != before) return std::nullopt;
    return h;
  }

  void miblist(const xml::Element& list, HostConfig& h) {
    check_attributes(list, {}, {});
    check_no_text(list);
    for (const auto& e : list.children) {
      if (e.name != "mib") {
        report(Kind::SchemaViolation, e, "", "<miblist> may only contain <mib>");
        continue;
      }
      check_empty(e);
      if (!check_attributes(e, {"id", "name", "type", "community", "min", "max"}, {"id", "name"})) continue;
      MibSpec m;
      m.id = *e.attribute("id");
      m.name = *e.attribute("name");
      if (!is_nmtoken(m.id)) report(Kind::BadValue, e, "id", "'" + m.id + "' is not a name token");
      try {
        m.oid = snmp::parse_oid(m.name);
      } catch (const snmp::OidError& err) {
        report(Kind::BadValue, e, "name", err.what());
      }
      if (const auto* t = e.attribute("type")) {
        if (*t == "GAUGE") {
          m.kind = VarKind::Gauge;
        } else if (*t == "DERIVE") {
          m.kind = VarKind::Derive;
        } else if (*t == "COUNTER") {
          m.kind = VarKind::Counter;
        } else {
          report(Kind::SchemaViolation, e, "type", "must be one of (GAUGE | DERIVE | COUNTER), got '" + *t + "'");
        }
      }
      if (const auto* c = e.attribute("community")) {
        if (!is_nmtoken(*c)) report(Kind::BadValue, e, "community", "'" + *c + "' is not a name token");
        m.community = *c;
      }
      for (auto [attr, slot] : {std::pair{"min", &m.min}, std::pair{"max", &m.max}}) {
        if (const auto* raw = e.attribute(attr)) {
          if (auto v = to_real(*raw)) {
            *slot = *v;
          } else {
            report(Kind::BadValue, e, attr, "'" + *raw + "' is not a number");
          }
        }
      }
      if (m.min && m.max && *m.min > *m.max) report(Kind::BadValue, e, "min", "min exceeds max");
      if (h.find_mib(m.id)) {
        report(Kind::DuplicateId, e, "id", "mib id '" + m.id + "' already used in host '" + h.name + "'");
        continue;
      }
      h.mibs.push_back(std::move(m));
    }
  }

  void archives(const xml::Element& list, HostConfig& h) {
    check_attributes(list, {}, {});
    check_no_text(list);
    for (const auto& e : list.children) {
      if (e.name != "rra") {
        report(Kind::SchemaViolation, e, "", "<archives> may only contain <rra>");
        continue;
      }
      check_empty(e);
      if (!check_attributes(e, {"cf", "xff", "granularity", "expire"}, {"granularity", "expire"})) continue;
      RraSpec r;
      if (const auto* cf = e.attribute("cf")) {
        if (auto parsed = grapher::parse_cf(*cf)) {
          r.cf = *parsed;
        } else {
          report(Kind::SchemaViolation, e, "cf", "must be one of (AVERAGE | MIN | MAX | LAST), got '" + *cf + "'");
        }
      }
      if (const auto* xff = e.attribute("xff")) {
        auto v = to_real(*xff);
        if (!v || *v < 0.0 || *v > 1.0) {
          report(Kind::BadValue, e, "xff", "'" + *xff + "' is not a fraction in [0, 1]");
        } else {
          r.xff = *v;
        }
      }
      auto gran = int_attr<std::int64_t>(e, "granularity", 1, INT64_MAX / 4);
      auto expire = int_attr<std::int64_t>(e, "expire", 1, INT64_MAX / 4);
      if (!gran || !expire) continue;
      r.granularity = *gran;
      r.expire = *expire;
      if (h.polldelay > 0 && r.granularity % h.polldelay != 0) {
        report(Kind::SchemaViolation, e, "granularity",
               "granularity " + std::to_string(r.granularity) + " is not a multiple of polldelay " +
                   std::to_string(h.polldelay));
      }
      if (r.expire < r.granularity) report(Kind::BadValue, e, "expire", "expire is shorter than granularity");
      h.rras.push_back(r);
    }
  }

  void graphs(const xml::Element& list, HostConfig& h) {
    check_attributes(list, {}, {});
    check_no_text(list);
    for (const auto& e : list.children) {
      if (e.name != "rrdgraph") {
        report(Kind::SchemaViolation, e, "", "<graphs> may only contain <rrdgraph>");
        continue;
      }
      check_no_text(e);
      if (!check_attributes(e, {"id", "width", "height", "seconds", "title"}, {"id", "title"})) continue;
      GraphSpec g;
      g.id = *e.attribute("id");
      g.title = *e.attribute("title");
      if (!is_xml_name(g.id)) report(Kind::BadValue, e, "id", "'" + g.id + "' is not a valid ID");
      auto ext = std::filesystem::path(g.id).extension().string();
      if (ext != ".png" && ext != ".svg") {
        report(Kind::BadValue, e, "id", "graph id must end in .png or .svg");
      }
      if (auto v = int_attr<int>(e, "width", 1, 100000)) g.width = *v;
      if (auto v = int_attr<int>(e, "height", 1, 100000)) g.height = *v;
      if (const auto* s = e.attribute("seconds")) {
        g.seconds = *s;
        try {
          grapher::parse_at_time(g.seconds, 0);
        } catch (const grapher::BadTimeSpec& err) {
          report(Kind::BadValue, e, "seconds", err.what());
        }
      }
      for (const auto& line : e.children) {
        if (line.name != "line") {
          report(Kind::SchemaViolation, line, "", "<rrdgraph> may only contain <line>");
          continue;
        }
        if (!line.children.empty()) report(Kind::SchemaViolation, line, "", "character data only");
        g.lines.emplace_back(trim(line.text));
      }
      if (g.lines.empty()) {
        report(Kind::SchemaViolation, e, "", "<rrdgraph> needs at least one <line>");
        continue;
      }
      try {
        g.program = grapher::parse_graph_script(g.lines);
        for (const auto& def : g.program.defs) {
          if (!h.find_mib(def.mib_id)) {
            report(Kind::BadValue, e, "", "DEF references unknown mib '" + def.mib_id + "'");
          }
        }
      } catch (const grapher::ScriptError& err) {
        report(Kind::BadValue, e, "", err.what());
      }
      if (h.find_graph(g.id)) {
        report(Kind::DuplicateId, e, "id", "graph id '" + g.id + "' already used in host '" + h.name + "'");
        continue;
      }
      h.graphs.push_back(std::move(g));
    }
  }

 private:
  std::filesystem::path base_;
};

inline std::vector<Diagnostic> validate(std::string_view xml_text, const std::filesystem::path& base,
                                        MonitorConfig& out) {
  xml::Element root;
  try {
    root = xml::parse(xml_text);
  } catch (const xml::ParseError& err) {
    return {{Kind::WellFormedness, err.line(), "", err.what()}};
  }
  Validator v(base);
  out = v.monitor(root);
  return std::move(v.diags);
}

inline std::string format_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace config_detail

// Parses and validates a configuration document, materializing every
// default. Relative directories resolve against `base_dir` when given.
inline MonitorConfig parse_config(std::string_view xml_text, const std::filesystem::path& base_dir = {}) {
  MonitorConfig cfg;
  auto diags = config_detail::validate(xml_text, base_dir, cfg);
  if (!diags.empty()) throw ConfigError(std::move(diags));
  return cfg;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError({{Diagnostic::Kind::IoError, 0, "", "cannot read '" + path.string() + "'"}});
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline MonitorConfig load_config(const std::filesystem::path& path) {
  auto base = std::filesystem::absolute(path).parent_path();
  return parse_config(read_text_file(path), base);
}

// Validation mode: empty iff the file parses. Throws ConfigError(IoError)
// when the file cannot be read.
inline std::vector<Diagnostic> check_config(const std::filesystem::path& path) {
  auto text = read_text_file(path);
  MonitorConfig cfg;
  return config_detail::validate(text, std::filesystem::absolute(path).parent_path(), cfg);
}

// Writes a normalized document; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const MonitorConfig& cfg) {
  using xml::escape_attr;
  using xml::escape_text;
  std::ostringstream o;
  o << "<?xml version=\"1.0\"?>\n<monitor";
  o << " pmc-num-connections=\"" << cfg.num_connections << "\"";
  if (cfg.pmc_logfile) o << " pmc-logfile=\"" << escape_attr(cfg.pmc_logfile->string()) << "\"";
  o << " pmc-verbosity=\"" << cfg.verbosity << "\"";
  o << " pmc-rrd-dir=\"" << escape_attr(cfg.rrd_dir.string()) << "\"";
  o << " pmc-xslt-dir=\"" << escape_attr(cfg.xslt_dir.string()) << "\"";
  o << " http-html-dir=\"" << escape_attr(cfg.html_dir.string()) << "\"";
  o << " http-port=\"" << cfg.http_port << "\"";
  if (cfg.http_logfile) o << " http-logfile=\"" << escape_attr(cfg.http_logfile->string()) << "\"";
  if (cfg.http_filter) o << " http-filter=\"" << escape_attr(*cfg.http_filter) << "\"";
  if (!cfg.http_filter_extensions.empty()) {
    std::string joined;
    for (const auto& e : cfg.http_filter_extensions) joined += (joined.empty() ? "" : " ") + e;
    o << " http-filter-extensions=\"" << escape_attr(joined) << "\"";
  }
  o << ">\n";
  for (const auto& h : cfg.hosts) {
    o << "  <host name=\"" << escape_attr(h.name) << "\" ip=\"" << escape_attr(h.ip) << "\" polldelay=\""
      << h.polldelay << "\"";
    if (!h.tags.empty()) {
      std::string joined;
      for (const auto& t : h.tags) joined += (joined.empty() ? "" : " ") + t;
      o << " tag=\"" << escape_attr(joined) << "\"";
    }
    o << " snmpversion=\"" << (h.snmp_version == snmp::Version::V1 ? "1" : "2c") << "\">\n";
    if (h.description) o << "    <description>" << escape_text(*h.description) << "</description>\n";
    if (h.mailto) o << "    <mailto>" << escape_text(*h.mailto) << "</mailto>\n";
    o << "    <miblist>\n";
    for (const auto& m : h.mibs) {
      o << "      <mib id=\"" << escape_attr(m.id) << "\" name=\"" << escape_attr(m.name) << "\" type=\""
        << to_string(m.kind) << "\" community=\"" << escape_attr(m.community) << "\"";
      if (m.min) o << " min=\"" << config_detail::format_real(*m.min) << "\"";
      if (m.max) o << " max=\"" << config_detail::format_real(*m.max) << "\"";
      o << "/>\n";
    }
    o << "    </miblist>\n    <archives>\n";
    for (const auto& r : h.rras) {
      o << "      <rra cf=\"" << to_string(r.cf) << "\" xff=\"" << config_detail::format_real(r.xff)
        << "\" granularity=\"" << r.granularity << "\" expire=\"" << r.expire << "\"/>\n";
    }
    o << "    </archives>\n    <graphs>\n";
    for (const auto& g : h.graphs) {
      o << "      <rrdgraph id=\"" << escape_attr(g.id) << "\" width=\"" << g.width << "\" height=\"" << g.height
        << "\" seconds=\"" << escape_attr(g.seconds) << "\" title=\"" << escape_attr(g.title) << "\">\n";
      for (const auto& l : g.lines) o << "        <line>" << escape_text(l) << "</line>\n";
      o << "      </rrdgraph>\n";
    }
    o << "    </graphs>\n  </host>\n";
  }
  o << "</monitor>\n";
  return o.str();
}

}  // namespace farmwatch
