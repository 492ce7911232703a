#pragma once

// Test-only reference implementations. These work from the JSON form of a
// scene and use their own arithmetic so they do not share code paths with the
// library under test.

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace oracle {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------- areas

// Twice the exact area, always an integer for integer dimensions.
inline std::int64_t twice_area(const std::string& kind, const Json& d) {
  auto v = [&](const char* k) { return d.at(k).get<std::int64_t>(); };
  if (kind == "square") return 2 * v("side") * v("side");
  if (kind == "rectangle") return 2 * v("width") * v("height");
  if (kind == "right_triangle") return v("leg_a") * v("leg_b");
  if (kind == "trapezoid") return (v("base_a") + v("base_b")) * v("height");
  throw std::logic_error("oracle: unknown kind " + kind);
}

// round_half_up(x / 2) for x >= 0
inline std::int64_t half_up_of_twice(std::int64_t twice) { return (twice + 1) / 2; }

inline std::int64_t rounded_area(const Json& shape) {
  return half_up_of_twice(twice_area(shape.at("kind").get<std::string>(), shape.at("dims")));
}

// ---------------------------------------------------------------- answers

struct Ranked {
  std::size_t index;
  int distance;
};

inline int manhattan(const Json& a, const Json& b) {
  return std::abs(a.at("row").get<int>() - b.at("row").get<int>()) +
         std::abs(a.at("col").get<int>() - b.at("col").get<int>());
}

// Every non-target shape with its distance, found by enumeration.
inline std::vector<Ranked> all_distances(const Json& grid) {
  const auto& shapes = grid.at("shapes");
  const std::size_t t = grid.at("target_index").get<std::size_t>();
  std::vector<Ranked> out;
  for (std::size_t i = 0; i < shapes.size(); ++i)
    if (i != t) out.push_back({i, manhattan(shapes[t].at("cell"), shapes[i].at("cell"))});
  return out;
}

// Index of the unique nearest (farthest=false) or farthest shape, or nullopt on a tie.
inline std::optional<std::size_t> extreme(const Json& grid, bool farthest) {
  const auto d = all_distances(grid);
  int best = farthest ? -1 : 1 << 30;
  for (const auto& r : d) best = farthest ? std::max(best, r.distance) : std::min(best, r.distance);
  std::optional<std::size_t> found;
  int count = 0;
  for (const auto& r : d)
    if (r.distance == best) {
      ++count;
      found = r.index;
    }
  if (count != 1) return std::nullopt;
  return found;
}

inline std::optional<std::size_t> unique_largest(const Json& free_scene) {
  const auto& shapes = free_scene.at("shapes");
  std::int64_t best = -1;
  for (const auto& s : shapes) best = std::max(best, twice_area(s.at("kind"), s.at("dims")));
  std::optional<std::size_t> found;
  int count = 0;
  for (std::size_t i = 0; i < shapes.size(); ++i)
    if (twice_area(shapes[i].at("kind"), shapes[i].at("dims")) == best) {
      ++count;
      found = i;
    }
  if (count != 1) return std::nullopt;
  return found;
}

// Answer in wire form ({"type": ...}) for a task code name such as "MM_COMP_OOD".
inline Json answer(const Json& scene, const std::string& code, const std::string& gr_mode = "total") {
  const bool ood = code.size() > 4 && code.substr(code.size() - 4) == "_OOD";
  const auto& shapes = scene.at("shapes");
  auto integer = [](std::int64_t v) { return Json{{"type", "integer"}, {"value", v}}; };
  if (code.find("_GR") != std::string::npos) {
    if (ood) {
      auto i = unique_largest(scene);
      if (!i) throw std::runtime_error("oracle: tied largest");
      return integer(rounded_area(shapes[*i]));
    }
    if (gr_mode == "single") return integer(rounded_area(shapes[scene.at("query_index").get<std::size_t>()]));
    std::int64_t sum = 0;
    for (const auto& s : shapes) sum += rounded_area(s);
    return integer(sum);
  }
  auto other = extreme(scene, ood);
  if (!other) throw std::runtime_error("oracle: tied extreme");
  if (code.find("_SR") != std::string::npos) {
    const auto& c = shapes[*other].at("cell");
    return {{"type", "cell"}, {"row", c.at("row")}, {"col", c.at("col")}};
  }
  const std::int64_t a = rounded_area(shapes[scene.at("target_index").get<std::size_t>()]);
  const std::int64_t b = rounded_area(shapes[*other]);
  return integer(ood ? std::max(a, b) : a + b);
}

// ---------------------------------------------------------------- expressions

// Small exact fraction, independent of the library's Rational.
struct Frac {
  std::int64_t n = 0, d = 1;
  Frac() = default;
  Frac(std::int64_t num, std::int64_t den = 1) : n(num), d(den) {
    if (d < 0) n = -n, d = -d;
    const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) n /= g, d /= g;
  }
  friend Frac operator+(Frac a, Frac b) { return {a.n * b.d + b.n * a.d, a.d * b.d}; }
  friend Frac operator-(Frac a, Frac b) { return {a.n * b.d - b.n * a.d, a.d * b.d}; }
  friend Frac operator*(Frac a, Frac b) { return {a.n * b.n, a.d * b.d}; }
  friend Frac operator/(Frac a, Frac b) { return {a.n * b.d, a.d * b.n}; }
  friend bool operator==(Frac a, Frac b) { return a.n == b.n && a.d == b.d; }
  Frac abs() const { return {n < 0 ? -n : n, d}; }
  // Half-up rounding for non-negative values.
  std::int64_t round_half_up() const { return (2 * n + d) / (2 * d); }
};

// Recursive-descent evaluator for the arithmetic used in traces:
// numbers, + - \times * /, parentheses, |abs|, \frac{a}{b}.
class Expr {
 public:
  explicit Expr(std::string s) : s_(std::move(s)) {}

  Frac eval() {
    Frac v = sum();
    ws();
    if (p_ != s_.size()) fail("trailing input");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("expr: " + what + " at " + std::to_string(p_) + " in '" + s_ + "'");
  }
  void ws() {
    while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
  }
  bool eat(const std::string& tok) {
    ws();
    if (s_.compare(p_, tok.size(), tok) == 0) {
      p_ += tok.size();
      return true;
    }
    return false;
  }
  Frac sum() {
    Frac v = product();
    for (;;) {
      if (eat("+")) v = v + product();
      else if (eat("-")) v = v - product();
      else return v;
    }
  }
  Frac product() {
    Frac v = atom();
    for (;;) {
      if (eat("\\times") || eat("*")) v = v * atom();
      else if (eat("/")) v = v / atom();
      else return v;
    }
  }
  Frac atom() {
    ws();
    if (eat("\\frac{")) {
      Frac a = sum();
      if (!eat("}") || !eat("{")) fail("bad \\frac");
      Frac b = sum();
      if (!eat("}")) fail("bad \\frac");
      return a / b;
    }
    if (eat("(")) {
      Frac v = sum();
      if (!eat(")")) fail("missing )");
      return v;
    }
    if (eat("|")) {
      Frac v = sum();
      if (!eat("|")) fail("missing |");
      return v.abs();
    }
    if (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) {
      std::int64_t whole = 0;
      while (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) whole = whole * 10 + (s_[p_++] - '0');
      Frac v(whole);
      if (p_ + 1 < s_.size() && s_[p_] == '.' && std::isdigit(static_cast<unsigned char>(s_[p_ + 1]))) {
        ++p_;
        std::int64_t frac = 0, scale = 1;
        while (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) {
          frac = frac * 10 + (s_[p_++] - '0');
          scale *= 10;
        }
        v = v + Frac(frac, scale);
      }
      return v;
    }
    fail("unexpected token");
  }

  std::string s_;
  std::size_t p_ = 0;
};

inline Frac eval(const std::string& s) { return Expr(s).eval(); }

// A chain "e1 = e2 = ... [\approx k]" taken from after the last ':' of a line.
// Returns the chain's value when every link agrees (and the approximation is
// the half-up rounding), or throws describing the broken link.
inline Frac check_chain(std::string line) {
  if (auto c = line.rfind(':'); c != std::string::npos) line = line.substr(c + 1);
  while (!line.empty() && (line.back() == '.' || std::isspace(static_cast<unsigned char>(line.back())))) line.pop_back();
  std::optional<std::int64_t> approx;
  if (auto a = line.find("\\approx"); a != std::string::npos) {
    approx = eval(line.substr(a + 7)).n;
    line = line.substr(0, a);
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t e; (e = line.find('=', start)) != std::string::npos; start = e + 1) parts.push_back(line.substr(start, e - start));
  parts.push_back(line.substr(start));
  const Frac first = eval(parts.front());
  for (const auto& p : parts)
    if (!(eval(p) == first)) throw std::runtime_error("claim does not hold: '" + line + "'");
  if (approx && first.round_half_up() != *approx) throw std::runtime_error("bad rounding: '" + line + "'");
  return first;
}

// ---------------------------------------------------------------- scene text

struct TextShape {
  std::string color, kind;
  std::vector<int> dims;
  std::optional<std::pair<int, int>> cell;
};

// Parses render_scene_text output back into shapes.
inline std::vector<TextShape> parse_scene_text(const std::string& text) {
  static const std::regex line_re(
      R"(^An? (\w+) (square|rectangle|right triangle|trapezoid) with (.+?)(?: is at \((\d+), (\d+)\))?\.$)");
  static const std::regex num_re(R"((\d+) units)");
  std::vector<TextShape> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    std::smatch m;
    if (std::regex_match(line, m, line_re)) {
      TextShape s;
      s.color = m[1];
      s.kind = m[2] == "right triangle" ? "right_triangle" : std::string(m[2]);
      const std::string dims = m[3];
      for (auto it = std::sregex_iterator(dims.begin(), dims.end(), num_re); it != std::sregex_iterator(); ++it)
        s.dims.push_back(std::stoi((*it)[1]));
      if (m[4].matched) s.cell = std::make_pair(std::stoi(m[4]), std::stoi(m[5]));
      out.push_back(std::move(s));
    }
    start = end + 1;
  }
  return out;
}

// Dimension list of a JSON shape in the canonical order used by the text.
inline std::vector<int> dims_list(const Json& shape) {
  const auto& d = shape.at("dims");
  const std::string k = shape.at("kind");
  if (k == "square") return {d.at("side").get<int>()};
  if (k == "rectangle") return {d.at("width").get<int>(), d.at("height").get<int>()};
  if (k == "right_triangle") return {d.at("leg_a").get<int>(), d.at("leg_b").get<int>()};
  return {d.at("base_a").get<int>(), d.at("base_b").get<int>(), d.at("height").get<int>()};
}

// ---------------------------------------------------------------- SVG

struct SvgShape {
  int index = 0;
  std::string kind, color;
  std::vector<int> dims;
  int px_per_unit = 0;
  double min_x = 1e18, min_y = 1e18, max_x = -1e18, max_y = -1e18;
  std::vector<std::string> labels;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

struct SvgDoc {
  int width = 0, height = 0;
  int horizontal_lines = 0, vertical_lines = 0;  // outside shape groups
  std::vector<SvgShape> shapes;
};

inline std::map<std::string, std::string> attrs_of(const std::string& tag) {
  static const std::regex attr_re(R"re(([\w-]+)="([^"]*)")re");
  std::map<std::string, std::string> out;
  for (auto it = std::sregex_iterator(tag.begin(), tag.end(), attr_re); it != std::sregex_iterator(); ++it)
    out[(*it)[1]] = (*it)[2];
  return out;
}

inline SvgDoc parse_svg(const std::string& svg) {
  SvgDoc doc;
  static const std::regex tag_re(R"(<(/?)(\w+)([^>]*)>([^<]*))");
  SvgShape* current = nullptr;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), tag_re); it != std::sregex_iterator(); ++it) {
    const bool closing = (*it)[1] == "/";
    const std::string name = (*it)[2];
    auto a = attrs_of((*it)[3]);
    if (closing) {
      if (name == "g") current = nullptr;
      continue;
    }
    if (name == "svg") {
      doc.width = std::stoi(a["width"]);
      doc.height = std::stoi(a["height"]);
    } else if (name == "g") {
      doc.shapes.emplace_back();
      current = &doc.shapes.back();
      current->index = std::stoi(a["data-index"]);
      current->kind = a["data-kind"];
      current->color = a["data-color"];
      current->px_per_unit = std::stoi(a["data-px-per-unit"]);
      std::string d = a["data-dims"];
      for (std::size_t p = 0; p < d.size();) {
        std::size_t q = d.find(',', p);
        if (q == std::string::npos) q = d.size();
        current->dims.push_back(std::stoi(d.substr(p, q - p)));
        p = q + 1;
      }
    } else if (name == "rect" && current) {
      const double x = std::stod(a["x"]), y = std::stod(a["y"]), w = std::stod(a["width"]), h = std::stod(a["height"]);
      current->min_x = std::min(current->min_x, x);
      current->min_y = std::min(current->min_y, y);
      current->max_x = std::max(current->max_x, x + w);
      current->max_y = std::max(current->max_y, y + h);
    } else if (name == "polygon" && current) {
      const std::string pts = a["points"];
      static const std::regex pt_re(R"(([\d.]+),([\d.]+))");
      for (auto p = std::sregex_iterator(pts.begin(), pts.end(), pt_re); p != std::sregex_iterator(); ++p) {
        const double x = std::stod((*p)[1]), y = std::stod((*p)[2]);
        current->min_x = std::min(current->min_x, x);
        current->min_y = std::min(current->min_y, y);
        current->max_x = std::max(current->max_x, x);
        current->max_y = std::max(current->max_y, y);
      }
    } else if (name == "text" && current) {
      current->labels.push_back((*it)[4]);
    } else if (name == "line" && !current) {
      if (a["y1"] == a["y2"]) ++doc.horizontal_lines;
      else if (a["x1"] == a["x2"]) ++doc.vertical_lines;
    }
  }
  return doc;
}

// ---------------------------------------------------------------- PNG

struct Png {
  int width = 0, height = 0, bit_depth = 0, color_type = 0;
  std::vector<std::uint8_t> rgb;  // decoded when color_type 2, depth 8, filter 0 rows
  std::array<std::uint8_t, 3> at(int x, int y) const {
    const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 3;
    return {rgb[o], rgb[o + 1], rgb[o + 2]};
  }
};

inline std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) | p[3];
}

// Reads the header and, for 8-bit RGB images with unfiltered rows, the pixels.
inline Png read_png(const std::vector<std::uint8_t>& bytes) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 33 || !std::equal(sig, sig + 8, bytes.begin())) throw std::runtime_error("png: bad signature");
  Png png;
  std::vector<std::uint8_t> idat;
  for (std::size_t p = 8; p + 12 <= bytes.size();) {
    const std::uint32_t len = be32(&bytes[p]);
    const std::string type(reinterpret_cast<const char*>(&bytes[p + 4]), 4);
    const std::uint8_t* data = &bytes[p + 8];
    const std::uint32_t crc = be32(&bytes[p + 8 + len]);
    if (crc != ::crc32(::crc32(0, nullptr, 0), &bytes[p + 4], len + 4)) throw std::runtime_error("png: bad crc in " + type);
    if (type == "IHDR") {
      png.width = static_cast<int>(be32(data));
      png.height = static_cast<int>(be32(data + 4));
      png.bit_depth = data[8];
      png.color_type = data[9];
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    }
    p += 12 + len;
  }
  if (png.bit_depth == 8 && png.color_type == 2) {
    const std::size_t row = static_cast<std::size_t>(png.width) * 3 + 1;
    std::vector<std::uint8_t> raw(row * png.height);
    uLongf n = raw.size();
    if (::uncompress(raw.data(), &n, idat.data(), idat.size()) != Z_OK || n != raw.size())
      throw std::runtime_error("png: inflate failed");
    png.rgb.reserve(static_cast<std::size_t>(png.width) * png.height * 3);
    for (int y = 0; y < png.height; ++y) {
      if (raw[y * row] != 0) throw std::runtime_error("png: unsupported row filter");
      png.rgb.insert(png.rgb.end(), raw.begin() + y * row + 1, raw.begin() + (y + 1) * row);
    }
  }
  return png;
}

}  // namespace oracle
