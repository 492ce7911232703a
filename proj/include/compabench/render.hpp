#pragma once

#include <cstdio>
#include <string>
#include <variant>

#include "compabench/config.hpp"
#include "compabench/scene.hpp"

namespace compabench {

namespace detail {

// Fixed one-decimal formatting; every coordinate is a multiple of 0.5.
inline std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

class SvgWriter {
 public:
  SvgWriter(int w, int h) {
    out_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
           std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) + "\">\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke = "",
            int stroke_px = 0) {
    out_ += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(w) + "\" height=\"" + px(h) + "\" fill=\"" +
            fill + "\"" + stroke_attrs(stroke, stroke_px) + "/>\n";
  }

  void polygon(std::initializer_list<std::pair<double, double>> pts, const std::string& fill, const std::string& stroke,
               int stroke_px) {
    std::string p;
    for (const auto& [x, y] : pts) p += (p.empty() ? "" : " ") + px(x) + "," + px(y);
    out_ += "<polygon points=\"" + p + "\" fill=\"" + fill + "\"" + stroke_attrs(stroke, stroke_px) + "/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke, int stroke_px) {
    out_ += "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" + px(x2) + "\" y2=\"" + px(y2) + "\" stroke=\"" +
            stroke + "\" stroke-width=\"" + std::to_string(stroke_px) + "\"/>\n";
  }

  // anchor: "middle" or "end"
  void text(double x, double y, const std::string& s, int font_px, const std::string& fill, const char* anchor,
            const char* edge) {
    out_ += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-size=\"" + std::to_string(font_px) +
            "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\" fill=\"" + fill + "\" data-edge=\"" + edge +
            "\">" + s + "</text>\n";
  }

  void raw(const std::string& s) { out_ += s; }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  static std::string stroke_attrs(const std::string& stroke, int stroke_px) {
    if (stroke.empty()) return {};
    return " stroke=\"" + stroke + "\" stroke-width=\"" + std::to_string(stroke_px) + "\"";
  }

  std::string out_;
};

inline std::string dims_attr(const Shape& s) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        using std::to_string;
        if constexpr (std::is_same_v<T, SquareDims>) return to_string(d.side);
        else if constexpr (std::is_same_v<T, RectangleDims>) return to_string(d.width) + "," + to_string(d.height);
        else if constexpr (std::is_same_v<T, RightTriangleDims>) return to_string(d.leg_a) + "," + to_string(d.leg_b);
        else return to_string(d.base_a) + "," + to_string(d.base_b) + "," + to_string(d.height);
      },
      s.dims());
}

// Draws one shape whose bounding box has its top-left corner at (x, y), with
// labels outside the measured edges: horizontal lengths below (top base of a
// trapezoid above), vertical lengths to the left.
inline void draw_shape(SvgWriter& svg, std::size_t index, const Shape& s, double x, double y, int ppu,
                       const RenderSpec& spec) {
  const auto [wu, hu] = s.extent();
  const double w = wu * ppu, h = hu * ppu;
  const std::string fill = s.color().hex();
  const double below = y + h + spec.font_px + 2, left = x - 3, mid_y = y + h / 2 + spec.font_px / 3.0;

  svg.raw("<g data-index=\"" + std::to_string(index) + "\" data-kind=\"" + std::string(kind_id(s.kind())) +
          "\" data-color=\"" + std::string(s.color().name()) + "\" data-dims=\"" + dims_attr(s) +
          "\" data-px-per-unit=\"" + std::to_string(ppu) + "\">\n");
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        using std::to_string;
        if constexpr (std::is_same_v<T, SquareDims> || std::is_same_v<T, RectangleDims>) {
          svg.rect(x, y, w, h, fill, spec.stroke_color, spec.stroke_px);
          svg.text(x + w / 2, below, to_string(wu), spec.font_px, spec.label_color, "middle", "bottom");
          svg.text(left, mid_y, to_string(hu), spec.font_px, spec.label_color, "end", "left");
        } else if constexpr (std::is_same_v<T, RightTriangleDims>) {
          svg.polygon({{x, y + h}, {x + w, y + h}, {x, y}}, fill, spec.stroke_color, spec.stroke_px);
          svg.text(x + w / 2, below, to_string(d.leg_a), spec.font_px, spec.label_color, "middle", "bottom");
          svg.text(left, mid_y, to_string(d.leg_b), spec.font_px, spec.label_color, "end", "left");
        } else {
          const double a = d.base_a * ppu, b = d.base_b * ppu;
          const double ax = x + (w - a) / 2, bx = x + (w - b) / 2;
          svg.polygon({{ax, y + h}, {ax + a, y + h}, {bx + b, y}, {bx, y}}, fill, spec.stroke_color, spec.stroke_px);
          svg.line(x + w / 2, y, x + w / 2, y + h, spec.label_color, 1);
          svg.text(x + w / 2, below, to_string(d.base_a), spec.font_px, spec.label_color, "middle", "bottom");
          svg.text(x + w / 2, y - 5, to_string(d.base_b), spec.font_px, spec.label_color, "middle", "top");
          svg.text(left, mid_y, to_string(d.height), spec.font_px, spec.label_color, "end", "left");
        }
      },
      s.dims());
  svg.raw("</g>\n");
}

}  // namespace detail

inline std::pair<int, int> canvas_size(const Scene& scene) {
  if (const auto* f = std::get_if<FreeScene>(&scene)) return {f->canvas_w, f->canvas_h};
  const auto& g = std::get<GridScene>(scene);
  return {g.canvas_px(), g.canvas_px()};
}

// Deterministic SVG: background, grid lines (grid scenes), then one group per
// shape in scene order.
inline std::string render_svg(const Scene& scene, const RenderSpec& spec = {}) {
  const auto [w, h] = canvas_size(scene);
  detail::SvgWriter svg(w, h);
  svg.rect(0, 0, w, h, spec.background);
  if (const auto* f = std::get_if<FreeScene>(&scene)) {
    for (std::size_t i = 0; i < f->shapes.size(); ++i)
      detail::draw_shape(svg, i, f->shapes[i].shape, f->shapes[i].x, f->shapes[i].y, f->px_per_unit, spec);
  } else {
    const auto& g = std::get<GridScene>(scene);
    for (int i = 0; i <= g.grid_n; ++i) {
      const double p = i * g.cell_px;
      svg.line(0, p, w, p, spec.grid_color, spec.grid_line_px);
    }
    for (int i = 0; i <= g.grid_n; ++i) {
      const double p = i * g.cell_px;
      svg.line(p, 0, p, h, spec.grid_color, spec.grid_line_px);
    }
    for (std::size_t i = 0; i < g.placements.size(); ++i) {
      const auto& p = g.placements[i];
      const auto [wu, hu] = p.shape.extent();
      const double x = (p.cell.col - 1) * g.cell_px + (g.cell_px - wu * g.px_per_unit) / 2.0;
      const double y = (p.cell.row - 1) * g.cell_px + (g.cell_px - hu * g.px_per_unit) / 2.0;
      detail::draw_shape(svg, i, p.shape, x, y, g.px_per_unit, spec);
    }
  }
  return svg.finish();
}

}  // namespace compabench
