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
#include <png.h>

#include <cmath>
#include <functional>
#include <random>

#include "farmwatch/grapher/at_time.hpp"
#include "farmwatch/grapher/render.hpp"
#include "farmwatch/xml.hpp"

using namespace farmwatch;
using namespace farmwatch::grapher;

namespace {

constexpr std::int64_t kNow = 1018016032;

Series S(std::initializer_list<std::optional<double>> v) { return Series(v); }

struct DecodedPng {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;
};

// Independent decode through libpng's simplified API.
DecodedPng decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) throw std::runtime_error(img.message);
  img.format = PNG_FORMAT_RGB;
  DecodedPng out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.rgb.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr)) throw std::runtime_error(img.message);
  return out;
}

rrd::Rrd sample_db(std::int64_t step = 60) {
  rrd::Spec spec;
  spec.step = step;
  spec.variables = {{"freeMem", VarKind::Gauge, {}, {}}, {"load", VarKind::Gauge, {}, {}}};
  spec.archives = {{ConsolidationFn::Average, 0.5, step, step * 2000},
                   {ConsolidationFn::Max, 0.5, step * 10, step * 10 * 500}};
  auto db = rrd::Rrd::create(spec, static_cast<double>(kNow - 6 * 3600));
  for (std::int64_t t = kNow - 6 * 3600 + step; t <= kNow; t += step) {
    double x = static_cast<double>(t - kNow) / 3600.0;
    std::vector<std::optional<double>> row = {90000 + 5000 * std::sin(x), 1.5 + std::cos(3 * x)};
    db.update(static_cast<double>(t), row);
  }
  return db;
}

GraphProgram program(const std::vector<std::string>& lines) { return parse_graph_script(lines); }

RenderRequest request(int w, int h, std::int64_t start = kNow - 3 * 3600, std::int64_t end = kNow) {
  RenderRequest r;
  r.width = w;
  r.height = h;
  r.start = start;
  r.end = end;
  r.title = "Hourly data";
  return r;
}

// Expression tree evaluated by recursion, emitted in postfix for the parser.
struct Node {
  char op = 0;  // 0 = leaf
  bool is_var = false;
  double number = 0;
  std::unique_ptr<Node> l, r;
};

std::unique_ptr<Node> random_tree(std::mt19937& rng, int depth) {
  auto n = std::make_unique<Node>();
  if (depth == 0 || rng() % 3 == 0) {
    n->is_var = rng() % 2 == 0;
    n->number = static_cast<double>(static_cast<int>(rng() % 21) - 10);
    return n;
  }
  n->op = "+-*/"[rng() % 4];
  n->l = random_tree(rng, depth - 1);
  n->r = random_tree(rng, depth - 1);
  return n;
}

std::optional<double> eval_tree(const Node& n, std::optional<double> var) {
  if (!n.op) return n.is_var ? var : std::optional<double>(n.number);
  auto a = eval_tree(*n.l, var), b = eval_tree(*n.r, var);
  if (!a || !b) return std::nullopt;
  switch (n.op) {
    case '+': return *a + *b;
    case '-': return *a - *b;
    case '*': return *a * *b;
    default:
      if (*b == 0) return std::nullopt;
      return *a / *b;
  }
}

void postfix(const Node& n, std::vector<std::string>& out) {
  if (!n.op) {
    out.push_back(n.is_var ? "v" : std::to_string(static_cast<int>(n.number)));
    return;
  }
  postfix(*n.l, out);
  postfix(*n.r, out);
  out.push_back(std::string(1, n.op));
}

std::string postfix(const Node& n) {
  std::vector<std::string> tokens;
  postfix(n, tokens);
  std::string out;
  for (const auto& t : tokens) out += (out.empty() ? "" : ",") + t;
  return out;
}

}  // namespace

TEST(AtTime, Examples) {
  EXPECT_EQ(parse_at_time("-3h", kNow), 1018005232);
  EXPECT_EQ(parse_at_time("1018016032", kNow), 1018016032);
  EXPECT_EQ(parse_at_time("-0s", kNow), kNow);
  EXPECT_EQ(parse_at_time("-1w", kNow), kNow - 7 * 86400);
  EXPECT_EQ(parse_at_time("-2y", kNow), kNow - 2 * 365 * 86400);
  EXPECT_EQ(parse_at_time("-90m", kNow), kNow - 5400);
  EXPECT_EQ(parse_at_time("-1d", kNow), kNow - 86400);
  EXPECT_EQ(parse_at_time("-3", kNow), kNow - 3);  // bare count means seconds
  for (const char* bad : {"", "-", "3h", "-h", "-3x", "abc", "-3h2", "1e9"}) {
    EXPECT_THROW(parse_at_time(bad, kNow), BadTimeSpec) << bad;
  }
}

TEST(GraphScript, ParsesExamples) {
  auto p = program({"DEF:f=freeMem:AVERAGE", "CDEF:mb=f,1024,/", "LINE2:f#00FF00:free", "AREA:mb#0000FF",
                    "COMMENT:hello"});
  ASSERT_EQ(p.defs.size(), 1u);
  EXPECT_EQ(p.defs[0].mib_id, "freeMem");
  ASSERT_EQ(p.cdefs.size(), 1u);
  ASSERT_EQ(p.elements.size(), 3u);
  auto line = std::get<LineElement>(p.elements[0]);
  EXPECT_EQ(line.width, 2);
  EXPECT_EQ(line.color, (Rgb{0, 255, 0}));
  EXPECT_EQ(line.legend, "free");
  EXPECT_THROW(program({"DEF:f=freeMem:AVERAGE", "CDEF:x=f,+"}), ScriptError);
  EXPECT_THROW(program({"LINE1:nope#000000"}), ScriptError);
  EXPECT_THROW(program({"GPRINT:f:AVERAGE:%lf"}), ScriptError);
}

TEST(Cdef, Examples) {
  auto p = program({"DEF:f=freeMem:AVERAGE", "CDEF:a=f,1024,/", "CDEF:b=f,2,*", "CDEF:c=f,0,/"});
  std::map<std::string, Series> in{{"f", S({1024, 2048})}};
  EXPECT_EQ(eval_cdef(p.cdefs[0].expr, in, 2), S({1.0, 2.0}));
  in["f"] = S({std::nullopt, 4});
  EXPECT_EQ(eval_cdef(p.cdefs[1].expr, in, 2), S({std::nullopt, 8.0}));
  in["f"] = S({1, 0, -3});
  EXPECT_EQ(eval_cdef(p.cdefs[2].expr, in, 3), S({std::nullopt, std::nullopt, std::nullopt}));
}

TEST(Cdef, MatchesTreeOracleOnRandomExpressions) {
  std::mt19937 rng(2024);
  int compared = 0;
  for (int i = 0; i < 3000; ++i) {
    auto tree = random_tree(rng, 1 + static_cast<int>(rng() % 8));
    if (!tree->op) continue;
    const std::string rpn = postfix(*tree);
    auto p = program({"DEF:v=x:AVERAGE", "CDEF:out=" + rpn});
    for (std::optional<double> var : {std::optional<double>(3.0), std::optional<double>(0.0),
                                      std::optional<double>(-7.5), std::optional<double>()}) {
      std::map<std::string, Series> in{{"v", Series{var}}};
      auto got = eval_cdef(p.cdefs[0].expr, in, 1)[0];
      auto want = eval_tree(*tree, var);
      if (want && !std::isfinite(*want)) want.reset();
      ASSERT_EQ(got.has_value(), want.has_value()) << rpn;
      if (want) {
        EXPECT_DOUBLE_EQ(*got, *want) << rpn;
      }
      ++compared;
    }
  }
  EXPECT_GT(compared, 1000);
}

TEST(Render, PngHasRequestedSize) {
  auto db = sample_db();
  auto p = program({"DEF:f=freeMem:AVERAGE", "LINE2:f#FF0000:free memory"});
  auto img = render(p, db, request(320, 200), Format::Png);
  EXPECT_EQ(img.content_type, "image/png");
  ASSERT_GT(img.bytes.size(), 24u);
  const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  EXPECT_TRUE(std::equal(sig, sig + 8, img.bytes.begin()));
  auto be32 = [&](std::size_t at) {
    return (img.bytes[at] << 24) | (img.bytes[at + 1] << 16) | (img.bytes[at + 2] << 8) | img.bytes[at + 3];
  };
  EXPECT_EQ(be32(16), 320);
  EXPECT_EQ(be32(20), 200);
  auto decoded = decode_png(img.bytes);
  EXPECT_EQ(decoded.width, 320);
  EXPECT_EQ(decoded.height, 200);
  std::size_t red = 0;
  for (std::size_t i = 0; i < decoded.rgb.size(); i += 3) {
    if (decoded.rgb[i] == 255 && decoded.rgb[i + 1] == 0 && decoded.rgb[i + 2] == 0) ++red;
  }
  EXPECT_GT(red, 200u);
}

TEST(Render, ExactSizeAcrossShapes) {
  auto db = sample_db();
  auto p = program({"DEF:f=freeMem:AVERAGE", "DEF:l=load:AVERAGE", "AREA:f#00FF00:free", "LINE1:l#0000FF:load",
                    "COMMENT:a comment"});
  for (auto [w, h] : {std::pair{50, 50}, {51, 77}, {400, 180}, {1000, 60}, {60, 900}}) {
    auto decoded = decode_png(render(p, db, request(w, h), Format::Png).bytes);
    EXPECT_EQ(decoded.width, w);
    EXPECT_EQ(decoded.height, h);
  }
}

TEST(Render, SvgDeterministicAndWellFormed) {
  auto db = sample_db();
  auto p = program({"DEF:f=freeMem:AVERAGE", "CDEF:k=f,1024,/", "AREA:k#00FF00:free kB", "LINE1:k#000000"});
  auto a = render(p, db, request(400, 180), Format::Svg);
  auto b = render(p, sample_db(), request(400, 180), Format::Svg);
  EXPECT_EQ(a.content_type, "image/svg+xml");
  EXPECT_EQ(a.bytes, b.bytes);
  std::string text(a.bytes.begin(), a.bytes.end());
  auto root = xml::parse(text);
  EXPECT_EQ(root.name, "svg");
  EXPECT_EQ(*root.attribute("width"), "400");
  EXPECT_EQ(*root.attribute("height"), "180");
  EXPECT_NE(text.find("Hourly data"), std::string::npos);
  EXPECT_NE(text.find("free kB"), std::string::npos);
}

TEST(Render, AreasBeforeLines) {
  auto db = sample_db();
  auto p = program({"DEF:f=freeMem:AVERAGE", "LINE1:f#111111", "AREA:f#222222"});
  auto sc = layout(p, evaluate(p, db, kNow - 3600, kNow), request(300, 150));
  std::optional<std::size_t> area, line;
  for (std::size_t i = 0; i < sc.items.size(); ++i) {
    if (auto* poly = std::get_if<scene::Polygon>(&sc.items[i]); poly && poly->fill == Rgb{0x22, 0x22, 0x22}) {
      if (!area) area = i;
    }
    if (auto* pl = std::get_if<scene::Polyline>(&sc.items[i]); pl && pl->color == Rgb{0x11, 0x11, 0x11}) {
      if (!line) line = i;
    }
  }
  ASSERT_TRUE(area && line);
  EXPECT_LT(*area, *line);
}

TEST(Render, AllUnknownWindowRenders) {
  auto db = sample_db();
  auto p = program({"DEF:f=freeMem:AVERAGE", "LINE1:f#FF0000"});
  auto req = request(200, 100, kNow + 3600, kNow + 7200);  // nothing recorded yet
  auto decoded = decode_png(render(p, db, req, Format::Png).bytes);
  EXPECT_EQ(decoded.width, 200);
  for (std::size_t i = 0; i < decoded.rgb.size(); i += 3) {
    ASSERT_FALSE(decoded.rgb[i] == 255 && decoded.rgb[i + 1] == 0 && decoded.rgb[i + 2] == 0);
  }
  auto sc = layout(p, evaluate(p, db, req.start, req.end), req);
  for (const auto& item : sc.items) {
    if (auto* pl = std::get_if<scene::Polyline>(&item)) {
      EXPECT_FALSE(pl->color == (Rgb{255, 0, 0}));
    }
  }
}

TEST(Render, Errors) {
  auto db = sample_db();
  auto p = program({"DEF:f=freeMem:AVERAGE", "LINE1:f#FF0000"});
  auto kind = [&](auto&& fn) {
    try {
      fn();
    } catch (const GraphError& e) {
      return std::optional(e.kind());
    }
    return std::optional<GraphError::Kind>();
  };
  EXPECT_EQ(kind([&] { render(p, db, request(49, 100), Format::Png); }), GraphError::Kind::BadSize);
  EXPECT_EQ(kind([&] { render(p, db, request(100, 49), Format::Svg); }), GraphError::Kind::BadSize);
  EXPECT_EQ(kind([&] { render(p, db, request(100, 100, kNow, kNow), Format::Png); }), GraphError::Kind::WindowEmpty);
  auto pmin = program({"DEF:f=freeMem:MIN", "LINE1:f#FF0000"});
  EXPECT_EQ(kind([&] { render(pmin, db, request(100, 100), Format::Png); }), GraphError::Kind::NoSuchCf);
  auto pmissing = program({"DEF:f=swap:AVERAGE", "LINE1:f#FF0000"});
  EXPECT_EQ(kind([&] { render(pmissing, db, request(100, 100), Format::Png); }), GraphError::Kind::NoSuchGraph);
}

TEST(Render, DoesNotMutateArchive) {
  auto db = sample_db();
  auto before = db.serialize();
  auto p = program({"DEF:f=freeMem:AVERAGE", "DEF:m=load:MAX", "LINE1:f#FF0000", "LINE1:m#00FF00"});
  render(p, db, request(300, 120), Format::Png);
  render(p, db, request(300, 120, kNow - 86400 * 3), Format::Svg);
  EXPECT_EQ(db.serialize(), before);
}

TEST(Render, MixedGranularitiesAlignToFinest) {
  auto db = sample_db();
  auto p = program({"DEF:f=freeMem:AVERAGE", "DEF:m=load:MAX"});
  auto data = evaluate(p, db, kNow - 3600, kNow);
  EXPECT_EQ(data.step, 60);
  ASSERT_EQ(data.times.size(), 61u);  // unaligned window touches 61 steps
  const auto& m = data.series.at("m");
  // MAX rows span 600 s, so each value repeats over ten fine steps
  for (std::size_t i = 0; i < data.times.size(); ++i) {
    std::int64_t coarse_end = (rrd::detail::floor_div(data.times[i] - 1, 600) + 1) * 600;
    auto rows = db.fetch(ConsolidationFn::Max, static_cast<double>(coarse_end - 600), static_cast<double>(coarse_end));
    ASSERT_EQ(rows.rows.size(), 1u);
    EXPECT_EQ(m[i], rows.rows[0].values[1]);
  }
}

TEST(Render, AxisCoversEveryKnownPoint) {
  std::mt19937 rng(5);
  for (int round = 0; round < 100; ++round) {
    rrd::Spec spec;
    spec.step = 10;
    spec.variables = {{"v", VarKind::Gauge, {}, {}}};
    spec.archives = {{ConsolidationFn::Average, 0.5, 10, 10000}};
    auto db = rrd::Rrd::create(spec, 0);
    std::normal_distribution<double> val(0, std::pow(10.0, static_cast<double>(rng() % 12) - 4));
    double offset = std::uniform_real_distribution<double>(-1e6, 1e6)(rng) * (rng() % 2);
    for (int t = 10; t <= 1000; t += 10) {
      std::vector<std::optional<double>> row{offset + val(rng)};
      if (rng() % 7 == 0) row[0].reset();
      db.update(t, row);
    }
    auto p = program({"DEF:v=v:AVERAGE", rng() % 2 ? "LINE1:v#000000" : "AREA:v#000000"});
    auto req = request(50 + static_cast<int>(rng() % 500), 50 + static_cast<int>(rng() % 300), 0, 1000);
    auto data = evaluate(p, db, req.start, req.end);
    auto sc = layout(p, data, req);
    EXPECT_LT(sc.lo, sc.hi);
    for (const auto& v : data.series.at("v")) {
      if (!v) continue;
      EXPECT_GE(*v, sc.lo);
      EXPECT_LE(*v, sc.hi);
    }
  }
}
