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

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "farmwatch/types.hpp"

namespace farmwatch::grapher {

class ScriptError : public std::invalid_argument {
 public:
  enum class Kind { SyntaxError, UndefinedVname, UnbalancedRpn };

  ScriptError(Kind kind, std::size_t line, const std::string& what)
      : std::invalid_argument("graph line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

struct RpnToken {
  enum class Kind { Number, Vname, Add, Sub, Mul, Div };
  Kind kind = Kind::Number;
  double number = 0.0;
  std::string vname;
  friend bool operator==(const RpnToken&, const RpnToken&) = default;
};

using RpnExpr = std::vector<RpnToken>;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Def {
  std::string vname;
  std::string mib_id;
  ConsolidationFn cf = ConsolidationFn::Average;
  friend bool operator==(const Def&, const Def&) = default;
};

struct Cdef {
  std::string vname;
  RpnExpr expr;
  friend bool operator==(const Cdef&, const Cdef&) = default;
};

struct LineElement {
  int width = 1;
  std::string vname;
  Rgb color;
  std::string legend;
  friend bool operator==(const LineElement&, const LineElement&) = default;
};

struct AreaElement {
  std::string vname;
  Rgb color;
  std::string legend;
  friend bool operator==(const AreaElement&, const AreaElement&) = default;
};

struct CommentElement {
  std::string text;
  friend bool operator==(const CommentElement&, const CommentElement&) = default;
};

using GraphElement = std::variant<LineElement, AreaElement, CommentElement>;

struct GraphProgram {
  std::vector<Def> defs;
  std::vector<Cdef> cdefs;  // in definition order; each may only use earlier names
  std::vector<GraphElement> elements;
  friend bool operator==(const GraphProgram&, const GraphProgram&) = default;
};

namespace detail {

inline bool valid_vname(std::string_view s) {
  if (s.empty() || s.size() > 255) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

// Splits on ':' honouring "\:" escapes.
inline std::vector<std::string> split_fields(std::string_view s) {
  std::vector<std::string> out(1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] == ':') {
      out.back() += ':';
      ++i;
    } else if (s[i] == ':') {
      out.emplace_back();
    } else {
      out.back() += s[i];
    }
  }
  return out;
}

inline std::optional<Rgb> parse_color(std::string_view hex) {
  if (hex.size() != 6) return std::nullopt;
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
  if (ec != std::errc{} || p != hex.data() + hex.size()) return std::nullopt;
  return Rgb{static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

inline std::optional<double> parse_number(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

inline std::optional<ConsolidationFn> parse_cf(std::string_view s) {
  if (s == "AVERAGE") return ConsolidationFn::Average;
  if (s == "MIN") return ConsolidationFn::Min;
  if (s == "MAX") return ConsolidationFn::Max;
  if (s == "LAST") return ConsolidationFn::Last;
  return std::nullopt;
}

// Parses one comma-separated RPN expression. Every name must be in `known`.
inline RpnExpr parse_rpn(std::string_view text, const std::vector<std::string>& known, std::size_t line) {
  using K = ScriptError::Kind;
  RpnExpr expr;
  int depth = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    std::string_view tok = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
    pos = comma == std::string_view::npos ? text.size() + 1 : comma + 1;
    RpnToken t;
    if (tok == "+" || tok == "-" || tok == "*" || tok == "/") {
      t.kind = tok == "+" ? RpnToken::Kind::Add
               : tok == "-" ? RpnToken::Kind::Sub
               : tok == "*" ? RpnToken::Kind::Mul
                            : RpnToken::Kind::Div;
      if (depth < 2) throw ScriptError(K::UnbalancedRpn, line, "operator '" + std::string(tok) + "' lacks operands");
      --depth;
    } else if (auto num = detail::parse_number(tok)) {
      t.kind = RpnToken::Kind::Number;
      t.number = *num;
      ++depth;
    } else if (detail::valid_vname(tok)) {
      bool found = false;
      for (const auto& k : known) found = found || k == tok;
      if (!found) throw ScriptError(K::UndefinedVname, line, "undefined name '" + std::string(tok) + "'");
      t.kind = RpnToken::Kind::Vname;
      t.vname = std::string(tok);
      ++depth;
    } else {
      throw ScriptError(K::SyntaxError, line, "bad RPN token '" + std::string(tok) + "'");
    }
    expr.push_back(std::move(t));
  }
  if (depth != 1) throw ScriptError(K::UnbalancedRpn, line, "expression leaves " + std::to_string(depth) + " values");
  return expr;
}

// Grammar, one instruction per line:
//   DEF:<vname>=<mib-id>:<CF>
//   CDEF:<vname>=<rpn>
//   LINE<1-3>:<vname>#RRGGBB[:legend]
//   AREA:<vname>#RRGGBB[:legend]
//   COMMENT:<text>
inline GraphProgram parse_graph_script(const std::vector<std::string>& lines) {
  using K = ScriptError::Kind;
  GraphProgram prog;
  std::vector<std::string> names;
  auto define = [&names](const std::string& vname, std::size_t line) {
    if (!detail::valid_vname(vname)) throw ScriptError(K::SyntaxError, line, "bad name '" + vname + "'");
    for (const auto& n : names) {
      if (n == vname) throw ScriptError(K::SyntaxError, line, "name '" + vname + "' defined twice");
    }
    names.push_back(vname);
  };
  auto require = [&names](const std::string& vname, std::size_t line) {
    for (const auto& n : names) {
      if (n == vname) return;
    }
    throw ScriptError(K::UndefinedVname, line, "undefined name '" + vname + "'");
  };
  auto plot_target = [&](const std::string& spec, std::size_t line, std::string& vname, Rgb& color) {
    auto hash = spec.find('#');
    if (hash == std::string::npos) throw ScriptError(K::SyntaxError, line, "missing #RRGGBB color");
    vname = spec.substr(0, hash);
    auto c = detail::parse_color(std::string_view(spec).substr(hash + 1));
    if (!c) throw ScriptError(K::SyntaxError, line, "bad color '" + spec.substr(hash) + "'");
    color = *c;
    require(vname, line);
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::size_t line = i + 1;
    std::string_view raw = lines[i];
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
    if (raw.empty()) throw ScriptError(K::SyntaxError, line, "empty instruction");

    auto colon = raw.find(':');
    if (colon == std::string_view::npos) throw ScriptError(K::SyntaxError, line, "missing ':'");
    std::string_view op = raw.substr(0, colon);
    std::string_view body = raw.substr(colon + 1);

    if (op == "DEF") {
      auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ScriptError(K::SyntaxError, line, "DEF needs '='");
      auto fields = detail::split_fields(body.substr(eq + 1));
      if (fields.size() != 2) throw ScriptError(K::SyntaxError, line, "DEF is <vname>=<mib-id>:<CF>");
      auto cf = parse_cf(fields[1]);
      if (!cf) throw ScriptError(K::SyntaxError, line, "unknown consolidation function '" + fields[1] + "'");
      if (fields[0].empty()) throw ScriptError(K::SyntaxError, line, "DEF without mib id");
      std::string vname(body.substr(0, eq));
      define(vname, line);
      prog.defs.push_back({vname, fields[0], *cf});
    } else if (op == "CDEF") {
      auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ScriptError(K::SyntaxError, line, "CDEF needs '='");
      std::string vname(body.substr(0, eq));
      auto expr = parse_rpn(body.substr(eq + 1), names, line);
      define(vname, line);
      prog.cdefs.push_back({vname, std::move(expr)});
    } else if (op.size() == 5 && op.starts_with("LINE") && op[4] >= '1' && op[4] <= '3') {
      auto fields = detail::split_fields(body);
      if (fields.size() > 2) throw ScriptError(K::SyntaxError, line, "too many fields in " + std::string(op));
      LineElement el;
      el.width = op[4] - '0';
      plot_target(fields[0], line, el.vname, el.color);
      if (fields.size() == 2) el.legend = fields[1];
      prog.elements.emplace_back(std::move(el));
    } else if (op == "AREA") {
      auto fields = detail::split_fields(body);
      if (fields.size() > 2) throw ScriptError(K::SyntaxError, line, "too many fields in AREA");
      AreaElement el;
      plot_target(fields[0], line, el.vname, el.color);
      if (fields.size() == 2) el.legend = fields[1];
      prog.elements.emplace_back(std::move(el));
    } else if (op == "COMMENT") {
      prog.elements.emplace_back(CommentElement{std::string(body)});
    } else {
      throw ScriptError(K::SyntaxError, line, "unsupported instruction '" + std::string(op) + "'");
    }
  }
  return prog;
}

}  // namespace farmwatch::grapher
