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

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "farmwatch/grapher/font.hpp"
#include "farmwatch/grapher/script.hpp"
#include "farmwatch/rrd.hpp"
#include "farmwatch/xml.hpp"

namespace farmwatch::grapher {

class GraphError : public std::runtime_error {
 public:
  enum class Kind { NoSuchGraph, NoSuchCf, WindowEmpty, BadSize };

  GraphError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

using Series = std::vector<std::optional<double>>;

inline constexpr int kMinSize = 50;
inline constexpr int kMaxSize = 10000;

// Pointwise stack evaluation. Unknown operands and division by zero give unknown.
inline Series eval_cdef(const RpnExpr& expr, const std::map<std::string, Series>& inputs, std::size_t n) {
  Series out(n);
  std::vector<double> stack;
  for (std::size_t i = 0; i < n; ++i) {
    stack.clear();
    bool known = true;
    for (const auto& tok : expr) {
      if (tok.kind == RpnToken::Kind::Number) {
        stack.push_back(tok.number);
        continue;
      }
      if (tok.kind == RpnToken::Kind::Vname) {
        auto it = inputs.find(tok.vname);
        if (it == inputs.end() || i >= it->second.size() || !it->second[i]) {
          known = false;
          break;
        }
        stack.push_back(*it->second[i]);
        continue;
      }
      if (stack.size() < 2) {
        known = false;
        break;
      }
      double b = stack.back();
      stack.pop_back();
      double& a = stack.back();
      switch (tok.kind) {
        case RpnToken::Kind::Add: a += b; break;
        case RpnToken::Kind::Sub: a -= b; break;
        case RpnToken::Kind::Mul: a *= b; break;
        case RpnToken::Kind::Div:
          if (b == 0.0) known = false;
          a /= b;
          break;
        default: break;
      }
      if (!known) break;
    }
    if (known && stack.size() == 1 && std::isfinite(stack.back())) out[i] = stack.back();
  }
  return out;
}

struct RenderRequest {
  int width = 400;
  int height = 180;
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::string title;
};

// Every DEF and CDEF evaluated on one time grid.
struct PlotData {
  std::int64_t step = 0;
  std::vector<std::int64_t> times;  // window ends
  std::map<std::string, Series> series;
};

inline PlotData evaluate(const GraphProgram& program, const rrd::Rrd& db, std::int64_t start, std::int64_t end) {
  if (!(start < end)) throw GraphError(GraphError::Kind::WindowEmpty, "graph window is empty");
  struct Fetched {
    std::size_t var;
    rrd::FetchResult res;
  };
  std::map<std::string, Fetched> fetched;
  const auto& vars = db.spec().variables;
  PlotData data;
  for (const auto& def : program.defs) {
    auto it = std::find_if(vars.begin(), vars.end(), [&](const rrd::Variable& v) { return v.id == def.mib_id; });
    if (it == vars.end()) throw GraphError(GraphError::Kind::NoSuchGraph, "no variable '" + def.mib_id + "'");
    try {
      auto res = db.fetch(def.cf, static_cast<double>(start), static_cast<double>(end));
      if (data.step == 0 || res.granularity < data.step) data.step = res.granularity;
      fetched.emplace(def.vname, Fetched{static_cast<std::size_t>(it - vars.begin()), std::move(res)});
    } catch (const rrd::RrdError& e) {
      if (e.kind() == rrd::RrdError::Kind::NoSuchCf) throw GraphError(GraphError::Kind::NoSuchCf, e.what());
      throw GraphError(GraphError::Kind::WindowEmpty, e.what());
    }
  }
  if (data.step == 0) data.step = std::max<std::int64_t>(1, (end - start) / 100);
  const std::int64_t first = rrd::detail::floor_div(start, data.step);
  const std::int64_t last = rrd::detail::floor_div(end - 1, data.step);
  for (std::int64_t w = first; w <= last; ++w) data.times.push_back((w + 1) * data.step);

  for (const auto& [vname, f] : fetched) {
    Series s(data.times.size());
    const auto gran = f.res.granularity;
    if (!f.res.rows.empty()) {
      const std::int64_t base = f.res.rows.front().time;
      for (std::size_t i = 0; i < data.times.size(); ++i) {
        // the coarse window (end - gran, end] holding this fine window's end
        std::int64_t wend = (rrd::detail::floor_div(data.times[i] - 1, gran) + 1) * gran;
        std::int64_t idx = (wend - base) / gran;
        if (idx >= 0 && idx < static_cast<std::int64_t>(f.res.rows.size())) {
          s[i] = f.res.rows[static_cast<std::size_t>(idx)].values[f.var];
        }
      }
    }
    data.series[vname] = std::move(s);
  }
  for (const auto& cdef : program.cdefs) {
    data.series[cdef.vname] = eval_cdef(cdef.expr, data.series, data.times.size());
  }
  return data;
}

// Drawing primitives shared by the SVG and raster back ends.
namespace scene {

struct Point {
  double x = 0, y = 0;
};
struct Rect {
  double x, y, w, h;
  Rgb fill;
};
struct Polyline {
  std::vector<Point> pts;
  Rgb color;
  int width = 1;
};
struct Polygon {
  std::vector<Point> pts;
  Rgb fill;
};
struct Text {
  enum class Anchor { Start, Middle, End };
  double x, y;  // y = top of the text cell
  std::string text;
  Rgb color;
  Anchor anchor = Anchor::Start;
};

using Item = std::variant<Rect, Polyline, Polygon, Text>;

struct Scene {
  int width = 0;
  int height = 0;
  std::vector<Item> items;
  // plot frame and axis range, kept for inspection
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double lo = 0, hi = 1;
};

}  // namespace scene

namespace render_detail {

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kGrid{220, 220, 220};
inline constexpr Rgb kFrame{96, 96, 96};

inline double nice_step(double span, int target) {
  double raw = span / std::max(1, target);
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

inline std::string si_label(double v) {
  char buf[32];
  double a = std::abs(v);
  if (a >= 1e9) {
    std::snprintf(buf, sizeof buf, "%.3gG", v / 1e9);
  } else if (a >= 1e6) {
    std::snprintf(buf, sizeof buf, "%.3gM", v / 1e6);
  } else if (a >= 1e4) {
    std::snprintf(buf, sizeof buf, "%.3gk", v / 1e3);
  } else {
    std::snprintf(buf, sizeof buf, "%.4g", a < 1e-12 ? 0.0 : v);
  }
  return buf;
}

inline std::string time_label(std::int64_t t, std::int64_t tick) {
  std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  ::localtime_r(&tt, &tm);
  char buf[32];
  if (tick < 60) {
    std::strftime(buf, sizeof buf, "%H:%M:%S", &tm);
  } else if (tick < 86400) {
    std::strftime(buf, sizeof buf, "%H:%M", &tm);
  } else {
    std::strftime(buf, sizeof buf, "%m-%d", &tm);
  }
  return buf;
}

inline double text_width(const std::string& s) { return static_cast<double>(s.size() * font::kWidth); }

}  // namespace render_detail

inline scene::Scene layout(const GraphProgram& program, const PlotData& data, const RenderRequest& req) {
  using namespace render_detail;
  using scene::Point;
  if (req.width < kMinSize || req.height < kMinSize || req.width > kMaxSize || req.height > kMaxSize) {
    throw GraphError(GraphError::Kind::BadSize, "graph size must be between " + std::to_string(kMinSize) + " and " +
                                                    std::to_string(kMaxSize) + " pixels");
  }
  if (!(req.start < req.end)) throw GraphError(GraphError::Kind::WindowEmpty, "graph window is empty");
  scene::Scene sc;
  sc.width = req.width;
  sc.height = req.height;
  const double W = req.width, H = req.height;
  sc.items.push_back(scene::Rect{0, 0, W, H, kWhite});

  // value range over everything drawn
  double lo = INFINITY, hi = -INFINITY;
  bool has_area = false;
  for (const auto& el : program.elements) {
    const std::string* vname = nullptr;
    if (auto* l = std::get_if<LineElement>(&el)) vname = &l->vname;
    if (auto* a = std::get_if<AreaElement>(&el)) {
      vname = &a->vname;
      has_area = true;
    }
    if (!vname) continue;
    auto it = data.series.find(*vname);
    if (it == data.series.end()) continue;
    for (const auto& v : it->second) {
      if (!v) continue;
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  }
  if (lo > hi) {
    lo = 0;
    hi = 1;
  }
  if (has_area) {
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
  }
  if (hi - lo <= std::max(std::abs(lo), std::abs(hi)) * 1e-9) {
    double pad = lo == 0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }

  // legend rows
  struct LegendRow {
    std::optional<Rgb> swatch;
    std::string text;
  };
  std::vector<LegendRow> legend;
  for (const auto& el : program.elements) {
    if (auto* l = std::get_if<LineElement>(&el); l && !l->legend.empty()) legend.push_back({l->color, l->legend});
    if (auto* a = std::get_if<AreaElement>(&el); a && !a->legend.empty()) legend.push_back({a->color, a->legend});
    if (auto* c = std::get_if<CommentElement>(&el)) legend.push_back({std::nullopt, c->text});
  }
  const double row_h = font::kHeight + 2;
  const double title_h = req.title.empty() ? 4 : font::kHeight + 4;
  const double axis_h = font::kHeight + 4;
  std::size_t fit = static_cast<std::size_t>(std::max(0.0, (H - title_h - axis_h - 20) / row_h));
  if (legend.size() > fit) legend.resize(fit);
  const double legend_h = static_cast<double>(legend.size()) * row_h;

  const double y0 = title_h;
  const double y1 = H - axis_h - legend_h;
  const int vticks = std::max(1, static_cast<int>((y1 - y0) / 30));
  const double vstep = nice_step(hi - lo, vticks);
  lo = std::floor(lo / vstep) * vstep;
  hi = std::ceil(hi / vstep) * vstep;
  if (lo == hi) hi = lo + vstep;

  std::vector<std::pair<double, std::string>> vlabels;
  double label_w = 0;
  const auto nticks = std::min<long long>(100, std::llround((hi - lo) / vstep));
  for (long long k = 0; k <= nticks; ++k) {
    const double v = lo + static_cast<double>(k) * vstep;
    vlabels.emplace_back(v, si_label(v));
    label_w = std::max(label_w, text_width(vlabels.back().second));
  }
  const double x0 = std::min(W / 2, label_w + 6);
  const double x1 = W - 8;
  sc.x0 = x0;
  sc.x1 = x1;
  sc.y0 = y0;
  sc.y1 = y1;
  sc.lo = lo;
  sc.hi = hi;

  auto xmap = [&](double t) {
    double f = (t - static_cast<double>(req.start)) / static_cast<double>(req.end - req.start);
    return x0 + std::clamp(f, 0.0, 1.0) * (x1 - x0);
  };
  auto ymap = [&](double v) { return y1 - (v - lo) / (hi - lo) * (y1 - y0); };

  if (!req.title.empty()) {
    sc.items.push_back(scene::Text{W / 2, 2, req.title, kBlack, scene::Text::Anchor::Middle});
  }

  // horizontal grid and value labels
  for (const auto& [v, label] : vlabels) {
    double y = std::round(ymap(v));
    sc.items.push_back(scene::Polyline{{{x0, y}, {x1, y}}, kGrid, 1});
    sc.items.push_back(scene::Text{x0 - 3, y - font::kHeight / 2.0, label, kBlack, scene::Text::Anchor::End});
  }

  // vertical grid and time labels
  static constexpr std::int64_t kTicks[] = {1,    2,     5,     10,    15,     30,     60,     120,    300,
                                            600,  900,   1800,  3600,  7200,   10800,  21600,  43200,  86400,
                                            172800, 604800, 2592000, 31536000};
  const double span = static_cast<double>(req.end - req.start);
  const double max_ticks = std::max(1.0, (x1 - x0) / 70);
  std::int64_t tick = kTicks[std::size(kTicks) - 1];
  for (auto t : kTicks) {
    if (span / static_cast<double>(t) <= max_ticks) {
      tick = t;
      break;
    }
  }
  for (std::int64_t t = (rrd::detail::floor_div(req.start, tick) + 1) * tick; t < req.end; t += tick) {
    double x = std::round(xmap(static_cast<double>(t)));
    sc.items.push_back(scene::Polyline{{{x, y0}, {x, y1}}, kGrid, 1});
    sc.items.push_back(scene::Text{x, y1 + 3, time_label(t, tick), kBlack, scene::Text::Anchor::Middle});
  }

  // areas first, then lines, each in program order
  auto runs = [&](const Series& s, auto&& emit) {
    std::vector<Point> run;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i]) {
        run.push_back({xmap(static_cast<double>(data.times[i])), ymap(*s[i])});
      } else if (!run.empty()) {
        emit(run);
        run.clear();
      }
    }
    if (!run.empty()) emit(run);
  };
  const double base_y = ymap(std::clamp(0.0, lo, hi));
  for (const auto& el : program.elements) {
    auto* a = std::get_if<AreaElement>(&el);
    if (!a) continue;
    auto it = data.series.find(a->vname);
    if (it == data.series.end()) continue;
    runs(it->second, [&](const std::vector<Point>& run) {
      std::vector<Point> poly;
      poly.push_back({run.front().x, base_y});
      poly.insert(poly.end(), run.begin(), run.end());
      poly.push_back({run.back().x, base_y});
      sc.items.push_back(scene::Polygon{std::move(poly), a->color});
    });
  }
  for (const auto& el : program.elements) {
    auto* l = std::get_if<LineElement>(&el);
    if (!l) continue;
    auto it = data.series.find(l->vname);
    if (it == data.series.end()) continue;
    runs(it->second, [&](const std::vector<Point>& run) {
      sc.items.push_back(scene::Polyline{run, l->color, l->width});
    });
  }

  // frame
  sc.items.push_back(scene::Polyline{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}, kFrame, 1});

  double ly = H - legend_h;
  for (const auto& row : legend) {
    double tx = 4;
    if (row.swatch) {
      sc.items.push_back(scene::Rect{4, ly + 2, 8, 8, *row.swatch});
      tx = 16;
    }
    sc.items.push_back(scene::Text{tx, ly + 1, row.text, kBlack, scene::Text::Anchor::Start});
    ly += row_h;
  }
  return sc;
}

namespace render_detail {

inline void fmt(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  out += buf;
}

inline std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02X%02X%02X", c.r, c.g, c.b);
  return buf;
}

inline void points(std::string& out, const std::vector<scene::Point>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ' ';
    fmt(out, pts[i].x);
    out += ',';
    fmt(out, pts[i].y);
  }
}

}  // namespace render_detail

inline std::string to_svg(const scene::Scene& sc) {
  using namespace render_detail;
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(sc.width) + "\" height=\"" +
         std::to_string(sc.height) + "\" viewBox=\"0 0 " + std::to_string(sc.width) + " " +
         std::to_string(sc.height) + "\" font-family=\"monospace\" font-size=\"10\">\n";
  for (const auto& item : sc.items) {
    if (auto* r = std::get_if<scene::Rect>(&item)) {
      out += "<rect x=\"";
      fmt(out, r->x);
      out += "\" y=\"";
      fmt(out, r->y);
      out += "\" width=\"";
      fmt(out, r->w);
      out += "\" height=\"";
      fmt(out, r->h);
      out += "\" fill=\"" + hex(r->fill) + "\"/>\n";
    } else if (auto* l = std::get_if<scene::Polyline>(&item)) {
      out += "<polyline fill=\"none\" stroke=\"" + hex(l->color) + "\" stroke-width=\"" + std::to_string(l->width) +
             "\" points=\"";
      points(out, l->pts);
      out += "\"/>\n";
    } else if (auto* p = std::get_if<scene::Polygon>(&item)) {
      out += "<polygon fill=\"" + hex(p->fill) + "\" points=\"";
      points(out, p->pts);
      out += "\"/>\n";
    } else if (auto* t = std::get_if<scene::Text>(&item)) {
      static constexpr const char* anchors[] = {"start", "middle", "end"};
      out += "<text x=\"";
      fmt(out, t->x);
      out += "\" y=\"";
      fmt(out, t->y + font::kHeight - 2);
      out += "\" fill=\"" + hex(t->color) + "\" text-anchor=\"" + anchors[static_cast<int>(t->anchor)] + "\">" +
             xml::escape_text(t->text) + "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

// RGB raster of exactly width x height pixels.
class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 255) {}

  int width() const noexcept { return w_; }
  int height() const noexcept { return h_; }
  const std::vector<std::uint8_t>& pixels() const noexcept { return px_; }

  Rgb at(int x, int y) const {
    auto i = index(x, y);
    return {px_[i], px_[i + 1], px_[i + 2]};
  }

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    auto i = index(x, y);
    px_[i] = c.r;
    px_[i + 1] = c.g;
    px_[i + 2] = c.b;
  }

  void fill_rect(double x, double y, double w, double h, Rgb c) {
    int xa = static_cast<int>(std::lround(x)), ya = static_cast<int>(std::lround(y));
    int xb = static_cast<int>(std::lround(x + w)), yb = static_cast<int>(std::lround(y + h));
    for (int yy = std::max(0, ya); yy < std::min(h_, yb); ++yy) {
      for (int xx = std::max(0, xa); xx < std::min(w_, xb); ++xx) set(xx, yy, c);
    }
  }

  void line(scene::Point a, scene::Point b, Rgb c, int width) {
    int x0 = static_cast<int>(std::lround(a.x)), y0 = static_cast<int>(std::lround(a.y));
    int x1 = static_cast<int>(std::lround(b.x)), y1 = static_cast<int>(std::lround(b.y));
    int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    const int lo = -(width - 1) / 2, hi = width / 2;
    while (true) {
      for (int oy = lo; oy <= hi; ++oy) {
        for (int ox = lo; ox <= hi; ++ox) set(x0 + ox, y0 + oy, c);
      }
      if (x0 == x1 && y0 == y1) break;
      int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  // Even-odd scanline fill sampled at pixel centres.
  void polygon(const std::vector<scene::Point>& pts, Rgb c) {
    if (pts.size() < 3) return;
    std::vector<double> xs;
    for (int y = 0; y < h_; ++y) {
      const double cy = y + 0.5;
      xs.clear();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        auto p = pts[i], q = pts[(i + 1) % pts.size()];
        if ((p.y <= cy && q.y > cy) || (q.y <= cy && p.y > cy)) xs.push_back(p.x + (cy - p.y) / (q.y - p.y) * (q.x - p.x));
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
        int xa = static_cast<int>(std::ceil(xs[i] - 0.5)), xb = static_cast<int>(std::floor(xs[i + 1] - 0.5));
        for (int x = std::max(0, xa); x <= std::min(w_ - 1, xb); ++x) set(x, y, c);
      }
    }
  }

  void text(double x, double y, const std::string& s, Rgb c) {
    int cx = static_cast<int>(std::lround(x)), cy = static_cast<int>(std::lround(y));
    for (unsigned char ch : s) {
      if (ch < 32 || ch > 126) ch = '?';
      const auto& glyph = font::kGlyphs[ch - 32];
      for (int row = 0; row < font::kHeight; ++row) {
        for (int col = 0; col < font::kWidth; ++col) {
          if (glyph[row] & (1 << (font::kWidth - 1 - col))) set(cx + col, cy + row, c);
        }
      }
      cx += font::kWidth;
    }
  }

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x)) * 3;
  }

  int w_, h_;
  std::vector<std::uint8_t> px_;
};

inline Canvas rasterize(const scene::Scene& sc) {
  Canvas cv(sc.width, sc.height);
  for (const auto& item : sc.items) {
    if (auto* r = std::get_if<scene::Rect>(&item)) {
      cv.fill_rect(r->x, r->y, r->w, r->h, r->fill);
    } else if (auto* l = std::get_if<scene::Polyline>(&item)) {
      if (l->pts.size() == 1) cv.line(l->pts[0], l->pts[0], l->color, l->width);
      for (std::size_t i = 1; i < l->pts.size(); ++i) cv.line(l->pts[i - 1], l->pts[i], l->color, l->width);
    } else if (auto* p = std::get_if<scene::Polygon>(&item)) {
      cv.polygon(p->pts, p->fill);
    } else if (auto* t = std::get_if<scene::Text>(&item)) {
      double w = render_detail::text_width(t->text);
      double x = t->anchor == scene::Text::Anchor::Start ? t->x
                 : t->anchor == scene::Text::Anchor::Middle ? t->x - w / 2
                                                            : t->x - w;
      cv.text(x, t->y, t->text, t->color);
    }
  }
  return cv;
}

inline std::vector<std::uint8_t> encode_png(const Canvas& cv) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw std::runtime_error("PNG encoding failed");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        buf->insert(buf->end(), data, data + len);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(cv.width()), static_cast<png_uint_32>(cv.height()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto stride = static_cast<std::size_t>(cv.width()) * 3;
  for (int y = 0; y < cv.height(); ++y) {
    png_write_row(png, const_cast<png_bytep>(cv.pixels().data() + static_cast<std::size_t>(y) * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

struct Image {
  std::string content_type;
  std::vector<std::uint8_t> bytes;
};

enum class Format { Png, Svg };

inline std::optional<Format> format_for(std::string_view graph_id) {
  auto dot = graph_id.rfind('.');
  if (dot == std::string_view::npos) return std::nullopt;
  auto ext = graph_id.substr(dot);
  if (ext == ".png") return Format::Png;
  if (ext == ".svg") return Format::Svg;
  return std::nullopt;
}

// Reads `db` only.
inline Image render(const GraphProgram& program, const rrd::Rrd& db, const RenderRequest& req, Format format) {
  if (req.width < kMinSize || req.height < kMinSize || req.width > kMaxSize || req.height > kMaxSize) {
    throw GraphError(GraphError::Kind::BadSize, "graph size must be between " + std::to_string(kMinSize) + " and " +
                                                    std::to_string(kMaxSize) + " pixels");
  }
  auto data = evaluate(program, db, req.start, req.end);
  auto sc = layout(program, data, req);
  if (format == Format::Svg) {
    auto svg = to_svg(sc);
    return {"image/svg+xml", std::vector<std::uint8_t>(svg.begin(), svg.end())};
  }
  return {"image/png", encode_png(rasterize(sc))};
}

}  // namespace farmwatch::grapher
