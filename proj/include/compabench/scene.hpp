#pragma once

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <variant>
#include <vector>

#include "compabench/config.hpp"
#include "compabench/error.hpp"
#include "compabench/geometry.hpp"
#include "compabench/rng.hpp"

namespace compabench {

// Pixel rectangle; x/y is the top-left corner.
struct PixelBox {
  int x = 0, y = 0, w = 0, h = 0;

  PixelBox inflated(int m) const { return {x - m, y - m, w + 2 * m, h + 2 * m}; }
  bool intersects(const PixelBox& o) const { return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h; }
  bool inside(int canvas_w, int canvas_h) const { return x >= 0 && y >= 0 && x + w <= canvas_w && y + h <= canvas_h; }
  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

struct PlacedShape {
  Shape shape;
  int x = 0;  // top-left of the shape's bounding box, pixels
  int y = 0;
  friend bool operator==(const PlacedShape&, const PlacedShape&) = default;
};

struct FreeScene {
  int canvas_w = 512;
  int canvas_h = 512;
  int px_per_unit = 12;
  int label_margin_px = 28;
  std::vector<PlacedShape> shapes;
  std::size_t query_index = 0;  // shape asked about in single-shape GR questions

  PixelBox box(std::size_t i) const {
    const auto [w, h] = shapes[i].shape.extent();
    return {shapes[i].x, shapes[i].y, w * px_per_unit, h * px_per_unit};
  }
  // Shape box plus room for its dimension labels.
  PixelBox reserved_box(std::size_t i) const { return box(i).inflated(label_margin_px); }

  friend bool operator==(const FreeScene&, const FreeScene&) = default;
};

// 1-based grid cell; row 1 is the top row, column 1 the leftmost column.
struct Cell {
  int row = 1;
  int col = 1;
  friend bool operator==(const Cell&, const Cell&) = default;
};

constexpr int manhattan(Cell a, Cell b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col); }

struct GridPlacement {
  Shape shape;
  Cell cell;
  friend bool operator==(const GridPlacement&, const GridPlacement&) = default;
};

struct GridScene {
  int grid_n = 3;
  int cell_px = 100;
  int px_per_unit = 5;
  std::vector<GridPlacement> placements;
  std::size_t target_index = 0;

  int canvas_px() const { return grid_n * cell_px; }
  const GridPlacement& target() const { return placements[target_index]; }

  friend bool operator==(const GridScene&, const GridScene&) = default;
};

using Scene = std::variant<FreeScene, GridScene>;

// Distance from the target to every other placement, in placement order.
struct TargetDistance {
  std::size_t index;
  int distance;
};

inline std::vector<TargetDistance> target_distances(const GridScene& s) {
  std::vector<TargetDistance> out;
  for (std::size_t i = 0; i < s.placements.size(); ++i)
    if (i != s.target_index) out.push_back({i, manhattan(s.target().cell, s.placements[i].cell)});
  return out;
}

enum class Extreme : std::uint8_t { Nearest, Farthest };

inline std::string_view to_string(Extreme e) { return e == Extreme::Nearest ? "nearest" : "farthest"; }

// Index of the unique nearest/farthest non-target placement, or nullopt on a tie.
inline std::optional<std::size_t> extreme_index(const GridScene& s, Extreme which) {
  const auto ds = target_distances(s);
  if (ds.empty()) return std::nullopt;
  auto better = [which](int a, int b) { return which == Extreme::Nearest ? a < b : a > b; };
  std::size_t best = 0;
  bool tied = false;
  for (std::size_t i = 1; i < ds.size(); ++i) {
    if (better(ds[i].distance, ds[best].distance)) {
      best = i;
      tied = false;
    } else if (ds[i].distance == ds[best].distance) {
      tied = true;
    }
  }
  if (tied) return std::nullopt;
  return ds[best].index;
}

inline std::size_t require_extreme(const GridScene& s, Extreme which) {
  auto i = extreme_index(s, which);
  if (!i) throw IllPosedScene(std::string("no unique ") + std::string(to_string(which)) + " shape");
  return *i;
}

// Index of the unique largest shape by exact area, or nullopt on a tie.
inline std::optional<std::size_t> largest_index(const FreeScene& s) {
  if (s.shapes.empty()) return std::nullopt;
  std::size_t best = 0;
  bool tied = false;
  for (std::size_t i = 1; i < s.shapes.size(); ++i) {
    const auto a = area(s.shapes[i].shape), b = area(s.shapes[best].shape);
    if (a > b) {
      best = i;
      tied = false;
    } else if (a == b) {
      tied = true;
    }
  }
  if (tied) return std::nullopt;
  return best;
}

namespace detail {

inline Dimensions sample_dims(SceneRng& rng, ShapeKind kind, int lo, int hi) {
  switch (kind) {
    case ShapeKind::Square: return SquareDims{rng.uniform_int(lo, hi)};
    case ShapeKind::Rectangle: {
      const int w = rng.uniform_int(lo, hi);
      int h;
      do h = rng.uniform_int(lo, hi);
      while (h == w);
      return RectangleDims{w, h};
    }
    case ShapeKind::RightTriangle: return RightTriangleDims{rng.uniform_int(lo, hi), rng.uniform_int(lo, hi)};
    case ShapeKind::Trapezoid: {
      const int a = rng.uniform_int(lo, hi);
      int b;
      do b = rng.uniform_int(lo, hi);
      while (b == a);
      return TrapezoidDims{a, b, rng.uniform_int(lo, hi)};
    }
  }
  return SquareDims{lo};
}

// k shapes with pairwise distinct palette colors.
inline std::vector<Shape> sample_shapes(SceneRng& rng, const GenConfig& cfg, int k) {
  std::array<std::uint8_t, kPalette.size()> colors{};
  std::iota(colors.begin(), colors.end(), std::uint8_t{0});
  std::vector<Shape> shapes;
  shapes.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) + rng.index(colors.size() - static_cast<std::size_t>(i));
    std::swap(colors[static_cast<std::size_t>(i)], colors[j]);
    const auto kind = kAllShapeKinds[rng.index(kAllShapeKinds.size())];
    shapes.emplace_back(sample_dims(rng, kind, cfg.dim_min, cfg.dim_max), Color(colors[static_cast<std::size_t>(i)]));
  }
  return shapes;
}

// Rejection placement at one pixel scale. Shapes are placed largest first; each
// gets a bounded number of random positions before the attempt is abandoned.
inline bool try_place(SceneRng& rng, FreeScene& scene, int attempts) {
  constexpr int kPositionTries = 20;
  const std::size_t k = scene.shapes.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = scene.reserved_box(a), rb = scene.reserved_box(b);
    return ra.w * ra.h > rb.w * rb.h;
  });
  const int m = scene.label_margin_px;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    std::vector<std::size_t> placed;
    bool ok = true;
    for (std::size_t i : order) {
      const PixelBox b = scene.box(i);
      const int max_x = scene.canvas_w - m - b.w, max_y = scene.canvas_h - m - b.h;
      if (max_x < m || max_y < m) return false;  // cannot fit at this scale at all
      bool found = false;
      for (int t = 0; t < kPositionTries && !found; ++t) {
        scene.shapes[i].x = rng.uniform_int(m, max_x);
        scene.shapes[i].y = rng.uniform_int(m, max_y);
        const PixelBox r = scene.reserved_box(i);
        found = std::none_of(placed.begin(), placed.end(),
                             [&](std::size_t p) { return scene.reserved_box(p).intersects(r); });
      }
      if (!found) {
        ok = false;
        break;
      }
      placed.push_back(i);
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace detail

// Free-layout scene for area tasks. With require_unique_largest, content is
// resampled until exactly one shape has the largest exact area.
inline FreeScene sample_free_scene(SceneRng& rng, const GenConfig& cfg, bool require_unique_largest = false) {
  for (int resample = 0; resample < cfg.retry_budget; ++resample) {
    const int k = rng.uniform_int(cfg.shapes_min, cfg.shapes_max);
    FreeScene scene;
    scene.canvas_w = scene.canvas_h = cfg.canvas_px;
    scene.label_margin_px = cfg.label_margin_px;
    for (auto& s : detail::sample_shapes(rng, cfg, k)) scene.shapes.push_back({std::move(s), 0, 0});
    scene.query_index = rng.index(scene.shapes.size());
    if (require_unique_largest && !largest_index(scene)) continue;

    for (int ppu = cfg.px_per_unit; ppu >= cfg.min_px_per_unit; ppu -= cfg.px_shrink_step) {
      scene.px_per_unit = ppu;
      if (detail::try_place(rng, scene, cfg.attempts_per_level)) return scene;
    }
    throw GenerationExhausted("no valid free layout after shrinking to " + std::to_string(cfg.min_px_per_unit) +
                              " px/unit");
  }
  throw GenerationExhausted("free scene resample budget exhausted");
}

// Grid scene for spatial and compositional tasks. With require_unique_extremes,
// resamples until both the nearest and farthest non-target shapes are unique.
inline GridScene sample_grid_scene(SceneRng& rng, const GenConfig& cfg, bool require_unique_extremes = true) {
  for (int resample = 0; resample < cfg.retry_budget; ++resample) {
    GridScene scene;
    scene.grid_n = rng.uniform_int(cfg.grid_min, cfg.grid_max);
    scene.cell_px = cfg.grid_cell_px(scene.grid_n);
    const int cells = scene.grid_n * scene.grid_n;
    const int k = rng.uniform_int(cfg.shapes_min, std::min(cfg.shapes_max, cells));
    auto shapes = detail::sample_shapes(rng, cfg, k);

    std::vector<int> free_cells(static_cast<std::size_t>(cells));
    std::iota(free_cells.begin(), free_cells.end(), 0);
    for (int i = 0; i < k; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      std::swap(free_cells[ui], free_cells[ui + rng.index(free_cells.size() - ui)]);
      const int c = free_cells[ui];
      scene.placements.push_back({std::move(shapes[ui]), Cell{c / scene.grid_n + 1, c % scene.grid_n + 1}});
    }
    scene.target_index = rng.index(scene.placements.size());

    if (require_unique_extremes &&
        (!extreme_index(scene, Extreme::Nearest) || !extreme_index(scene, Extreme::Farthest)))
      continue;

    int max_extent = 1;
    for (const auto& p : scene.placements) {
      const auto [w, h] = p.shape.extent();
      max_extent = std::max({max_extent, w, h});
    }
    scene.px_per_unit = std::max(1, scene.cell_px * cfg.grid_fill_percent / 100 / max_extent);
    return scene;
  }
  throw GenerationExhausted("grid scene resample budget exhausted");
}

}  // namespace compabench
