#pragma once

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "compabench/error.hpp"

namespace compabench {

inline constexpr std::string_view kRasterizerName = "compabench-raster/1";

inline std::string rasterizer_identity() { return std::string(kRasterizerName) + " zlib/" + zlibVersion(); }

// Minimal rasterizer for the SVG subset render_svg() emits: <svg>, <g>, <rect>,
// <polygon>, <line> and <text> (digits and a few punctuation glyphs drawn from
// a built-in 5x7 bitmap font). Fills sample pixel centers without anti-aliasing.
class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 255) {}

  int width() const { return w_; }
  int height() const { return h_; }
  const std::vector<std::uint8_t>& pixels() const { return px_; }

  std::array<std::uint8_t, 3> at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x)) * 3;
    return {px_[i], px_[i + 1], px_[i + 2]};
  }

  void fill_polygon(const std::vector<std::pair<double, double>>& pts, std::array<std::uint8_t, 3> c) {
    if (pts.size() < 3) return;
    double min_y = pts[0].second, max_y = pts[0].second;
    for (const auto& p : pts) {
      min_y = std::min(min_y, p.second);
      max_y = std::max(max_y, p.second);
    }
    const int y0 = std::max(0, static_cast<int>(std::floor(min_y))), y1 = std::min(h_ - 1, static_cast<int>(std::ceil(max_y)));
    std::vector<double> xs;
    for (int y = y0; y <= y1; ++y) {
      const double sy = y + 0.5;
      xs.clear();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        if ((a.second <= sy && b.second > sy) || (b.second <= sy && a.second > sy))
          xs.push_back(a.first + (sy - a.second) * (b.first - a.first) / (b.second - a.second));
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
        const int xa = std::max(0, static_cast<int>(std::ceil(xs[i] - 0.5)));
        const int xb = std::min(w_ - 1, static_cast<int>(std::ceil(xs[i + 1] - 0.5)) - 1);
        for (int x = xa; x <= xb; ++x) set(x, y, c);
      }
    }
  }

  void stroke_segment(double x1, double y1, double x2, double y2, double width, std::array<std::uint8_t, 3> c) {
    const double dx = x2 - x1, dy = y2 - y1, len = std::hypot(dx, dy);
    const double hw = width / 2;
    if (len == 0) return;
    const double nx = -dy / len * hw, ny = dx / len * hw;
    // Extend by half the width along the segment so corners join squarely.
    const double ex = dx / len * hw, ey = dy / len * hw;
    fill_polygon({{x1 - ex + nx, y1 - ey + ny},
                  {x2 + ex + nx, y2 + ey + ny},
                  {x2 + ex - nx, y2 + ey - ny},
                  {x1 - ex - nx, y1 - ey - ny}},
                 c);
  }

  void stroke_polygon(const std::vector<std::pair<double, double>>& pts, double width, std::array<std::uint8_t, 3> c) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& a = pts[i];
      const auto& b = pts[(i + 1) % pts.size()];
      stroke_segment(a.first, a.second, b.first, b.second, width, c);
    }
  }

  // Baseline-anchored bitmap text; anchor is "start", "middle" or "end".
  void text(double x, double y, std::string_view s, int font_px, std::string_view anchor, std::array<std::uint8_t, 3> c) {
    const int scale = std::max(1, font_px / 8);
    const double advance = 6.0 * scale;
    const double total = advance * static_cast<double>(s.size()) - scale;
    double cx = x;
    if (anchor == "middle") cx -= total / 2;
    else if (anchor == "end") cx -= total;
    const int top = static_cast<int>(std::lround(y)) - 7 * scale;
    for (char ch : s) {
      const auto* g = glyph(ch);
      const int left = static_cast<int>(std::lround(cx));
      if (g)
        for (int row = 0; row < 7; ++row)
          for (int col = 0; col < 5; ++col)
            if ((*g)[static_cast<std::size_t>(row)] & (0x10 >> col))
              for (int sy = 0; sy < scale; ++sy)
                for (int sx = 0; sx < scale; ++sx) set(left + col * scale + sx, top + row * scale + sy, c);
      cx += advance;
    }
  }

 private:
  void set(int x, int y, std::array<std::uint8_t, 3> c) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x)) * 3;
    px_[i] = c[0];
    px_[i + 1] = c[1];
    px_[i + 2] = c[2];
  }

  using Glyph = std::array<std::uint8_t, 7>;
  static const Glyph* glyph(char ch) {
    static const std::map<char, Glyph> font = {
        {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}}, {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
        {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}}, {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
        {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}}, {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
        {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}}, {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
        {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}}, {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
        {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}}, {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
        {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}}, {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
        {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    };
    auto it = font.find(ch);
    return it == font.end() ? nullptr : &it->second;
  }

  int w_, h_;
  std::vector<std::uint8_t> px_;
};

namespace detail {

struct SvgElement {
  std::string name;
  std::map<std::string, std::string, std::less<>> attrs;
  std::string text;
};

inline double svg_number(const std::map<std::string, std::string, std::less<>>& attrs, std::string_view key) {
  auto it = attrs.find(key);
  if (it == attrs.end()) throw RasterizeFailure("missing attribute '" + std::string(key) + "'");
  double v = 0;
  const char* b = it->second.data();
  const char* e = b + it->second.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v))
    throw RasterizeFailure("bad number '" + it->second + "' for '" + std::string(key) + "'");
  return v;
}

inline std::array<std::uint8_t, 3> svg_color(const std::string& s) {
  if (s.size() != 7 || s[0] != '#') throw RasterizeFailure("unsupported color '" + s + "'");
  std::array<std::uint8_t, 3> c{};
  for (std::size_t i = 0; i < 3; ++i) {
    unsigned v = 0;
    auto [p, ec] = std::from_chars(s.data() + 1 + 2 * i, s.data() + 3 + 2 * i, v, 16);
    if (ec != std::errc() || p != s.data() + 3 + 2 * i) throw RasterizeFailure("bad color '" + s + "'");
    c[i] = static_cast<std::uint8_t>(v);
  }
  return c;
}

inline std::vector<std::pair<double, double>> svg_points(const std::string& s) {
  std::vector<std::pair<double, double>> pts;
  std::vector<double> vals;
  const char* p = s.data();
  const char* e = p + s.size();
  while (p < e) {
    while (p < e && (*p == ' ' || *p == ',')) ++p;
    if (p == e) break;
    double v = 0;
    auto [q, ec] = std::from_chars(p, e, v);
    if (ec != std::errc()) throw RasterizeFailure("bad polygon points");
    vals.push_back(v);
    p = q;
  }
  if (vals.size() % 2 != 0 || vals.size() < 6) throw RasterizeFailure("polygon needs at least three points");
  for (std::size_t i = 0; i < vals.size(); i += 2) pts.emplace_back(vals[i], vals[i + 1]);
  return pts;
}

inline std::vector<SvgElement> parse_svg(std::string_view svg) {
  std::vector<SvgElement> out;
  std::size_t i = 0;
  auto fail = [](const std::string& what) { throw RasterizeFailure("malformed SVG: " + what); };
  while (true) {
    i = svg.find('<', i);
    if (i == std::string_view::npos) break;
    const std::size_t close = svg.find('>', i);
    if (close == std::string_view::npos) fail("unterminated tag");
    std::string_view tag = svg.substr(i + 1, close - i - 1);
    i = close + 1;
    if (!tag.empty() && tag[0] == '/') continue;
    const bool self_closing = !tag.empty() && tag.back() == '/';
    if (self_closing) tag.remove_suffix(1);
    SvgElement el;
    std::size_t p = 0;
    while (p < tag.size() && tag[p] != ' ' && tag[p] != '\n') ++p;
    el.name = std::string(tag.substr(0, p));
    while (p < tag.size()) {
      while (p < tag.size() && (tag[p] == ' ' || tag[p] == '\n')) ++p;
      if (p >= tag.size()) break;
      const std::size_t eq = tag.find('=', p);
      if (eq == std::string_view::npos || eq + 1 >= tag.size() || tag[eq + 1] != '"') fail("bad attribute in <" + el.name + ">");
      const std::size_t end = tag.find('"', eq + 2);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      el.attrs.emplace(std::string(tag.substr(p, eq - p)), std::string(tag.substr(eq + 2, end - eq - 2)));
      p = end + 1;
    }
    if (el.name == "text") {
      const std::size_t endtag = svg.find("</text>", i);
      if (endtag == std::string_view::npos) fail("unterminated <text>");
      el.text = std::string(svg.substr(i, endtag - i));
      i = endtag + 7;
    }
    out.push_back(std::move(el));
  }
  if (out.empty() || out.front().name != "svg") fail("missing <svg> root");
  return out;
}

inline void png_chunk(std::vector<std::uint8_t>& out, const char* type, const std::uint8_t* data, std::size_t n) {
  auto be32 = [&](std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
  };
  be32(static_cast<std::uint32_t>(n));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data, data + n);
  const auto crc = crc32(0L, out.data() + start, static_cast<uInt>(n + 4));
  be32(static_cast<std::uint32_t>(crc));
}

}  // namespace detail

// 8-bit RGB PNG, filter type 0 on every row, zlib level 1.
inline std::vector<std::uint8_t> encode_png(const Canvas& c) {
  const auto w = static_cast<std::size_t>(c.width()), h = static_cast<std::size_t>(c.height());
  std::vector<std::uint8_t> raw;
  raw.reserve(h * (w * 3 + 1));
  for (std::size_t y = 0; y < h; ++y) {
    raw.push_back(0);
    const auto* row = c.pixels().data() + y * w * 3;
    raw.insert(raw.end(), row, row + w * 3);
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> z(zlen);
  if (compress2(z.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()), 1) != Z_OK)
    throw RasterizeFailure("zlib compression failed");
  z.resize(zlen);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  std::array<std::uint8_t, 13> ihdr{};
  for (int i = 0; i < 4; ++i) {
    ihdr[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(w >> (24 - 8 * i));
    ihdr[static_cast<std::size_t>(4 + i)] = static_cast<std::uint8_t>(h >> (24 - 8 * i));
  }
  ihdr[8] = 8;  // bit depth
  ihdr[9] = 2;  // truecolor
  detail::png_chunk(out, "IHDR", ihdr.data(), ihdr.size());
  detail::png_chunk(out, "IDAT", z.data(), z.size());
  detail::png_chunk(out, "IEND", nullptr, 0);
  return out;
}

inline Canvas rasterize_to_canvas(std::string_view svg) {
  const auto elements = detail::parse_svg(svg);
  const double wd = detail::svg_number(elements.front().attrs, "width");
  const double hd = detail::svg_number(elements.front().attrs, "height");
  if (wd < 1 || hd < 1 || wd > 8192 || hd > 8192) throw RasterizeFailure("canvas size out of range");
  Canvas canvas(static_cast<int>(wd), static_cast<int>(hd));
  for (std::size_t k = 1; k < elements.size(); ++k) {
    const auto& el = elements[k];
    const auto& a = el.attrs;
    auto stroke = [&](const std::vector<std::pair<double, double>>& pts) {
      if (auto it = a.find("stroke"); it != a.end())
        canvas.stroke_polygon(pts, detail::svg_number(a, "stroke-width"), detail::svg_color(it->second));
    };
    if (el.name == "rect") {
      const double x = detail::svg_number(a, "x"), y = detail::svg_number(a, "y");
      const double w = detail::svg_number(a, "width"), h = detail::svg_number(a, "height");
      const std::vector<std::pair<double, double>> pts = {{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}};
      canvas.fill_polygon(pts, detail::svg_color(a.at("fill")));
      stroke(pts);
    } else if (el.name == "polygon") {
      auto it = a.find("points");
      if (it == a.end()) throw RasterizeFailure("polygon without points");
      const auto pts = detail::svg_points(it->second);
      canvas.fill_polygon(pts, detail::svg_color(a.at("fill")));
      stroke(pts);
    } else if (el.name == "line") {
      auto it = a.find("stroke");
      if (it == a.end()) throw RasterizeFailure("line without stroke");
      canvas.stroke_segment(detail::svg_number(a, "x1"), detail::svg_number(a, "y1"), detail::svg_number(a, "x2"),
                            detail::svg_number(a, "y2"), detail::svg_number(a, "stroke-width"),
                            detail::svg_color(it->second));
    } else if (el.name == "text") {
      auto anchor = a.find("text-anchor");
      auto fill = a.find("fill");
      canvas.text(detail::svg_number(a, "x"), detail::svg_number(a, "y"), el.text,
                  static_cast<int>(detail::svg_number(a, "font-size")), anchor == a.end() ? "start" : anchor->second,
                  fill == a.end() ? std::array<std::uint8_t, 3>{0, 0, 0} : detail::svg_color(fill->second));
    } else if (el.name != "g") {
      throw RasterizeFailure("unsupported element <" + el.name + ">");
    }
  }
  return canvas;
}

inline std::vector<std::uint8_t> rasterize(std::string_view svg) { return encode_png(rasterize_to_canvas(svg)); }

}  // namespace compabench
