#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "compabench/config.hpp"
#include "compabench/geometry.hpp"
#include "compabench/rng.hpp"
#include "compabench/scene.hpp"

namespace compabench {

inline constexpr std::string_view kBenchmarkVersion = "1.0.0";

enum class TaskCode : std::uint8_t { PT_GR, PT_SR, PT_COMP, MM_GR, MM_SR, MM_COMP, MM_GR_OOD, MM_SR_OOD, MM_COMP_OOD };

inline constexpr std::array<TaskCode, 9> kAllTaskCodes = {
    TaskCode::PT_GR,  TaskCode::PT_SR,     TaskCode::PT_COMP,   TaskCode::MM_GR,      TaskCode::MM_SR,
    TaskCode::MM_COMP, TaskCode::MM_GR_OOD, TaskCode::MM_SR_OOD, TaskCode::MM_COMP_OOD};

enum class TaskFamily : std::uint8_t { GR, SR, COMP };

struct TaskCodeInfo {
  std::string_view name;  // "MM_GR_OOD"
  std::string_view cli;   // "mm-gr-ood"
  TaskFamily family;
  bool pure_text;
  bool ood;
};

inline constexpr TaskCodeInfo info(TaskCode c) {
  constexpr std::array<TaskCodeInfo, 9> table = {{
      {"PT_GR", "pt-gr", TaskFamily::GR, true, false},
      {"PT_SR", "pt-sr", TaskFamily::SR, true, false},
      {"PT_COMP", "pt-comp", TaskFamily::COMP, true, false},
      {"MM_GR", "mm-gr", TaskFamily::GR, false, false},
      {"MM_SR", "mm-sr", TaskFamily::SR, false, false},
      {"MM_COMP", "mm-comp", TaskFamily::COMP, false, false},
      {"MM_GR_OOD", "mm-gr-ood", TaskFamily::GR, false, true},
      {"MM_SR_OOD", "mm-sr-ood", TaskFamily::SR, false, true},
      {"MM_COMP_OOD", "mm-comp-ood", TaskFamily::COMP, false, true},
  }};
  return table[static_cast<std::size_t>(c)];
}

inline std::string_view to_string(TaskCode c) { return info(c).name; }

inline std::optional<TaskCode> task_code_from_string(std::string_view s) {
  for (TaskCode c : kAllTaskCodes)
    if (info(c).name == s || info(c).cli == s) return c;
  return std::nullopt;
}

// Compositional and OOD codes are evaluation-only by default.
constexpr bool eval_only(TaskCode c) { return info(c).family == TaskFamily::COMP || info(c).ood; }
constexpr bool uses_grid(TaskCode c) { return info(c).family != TaskFamily::GR; }

enum class AnswerKind : std::uint8_t { Integer, Cell };

constexpr AnswerKind answer_kind(TaskCode c) { return info(c).family == TaskFamily::SR ? AnswerKind::Cell : AnswerKind::Integer; }

struct IntegerArea {
  std::int64_t value = 0;
  friend bool operator==(const IntegerArea&, const IntegerArea&) = default;
};

using Answer = std::variant<IntegerArea, Cell>;

inline AnswerKind kind_of(const Answer& a) { return a.index() == 0 ? AnswerKind::Integer : AnswerKind::Cell; }

inline std::string answer_text(const Answer& a) {
  if (const auto* v = std::get_if<IntegerArea>(&a)) return std::to_string(v->value);
  const auto& c = std::get<Cell>(a);
  return "(" + std::to_string(c.row) + ", " + std::to_string(c.col) + ")";
}

enum class SubgoalKind : std::uint8_t { ShapeArea, Distance, ExtremeShape };

struct SubgoalFact {
  SubgoalKind kind = SubgoalKind::ShapeArea;
  Color color;
  std::int64_t value = 0;              // ShapeArea / Distance
  Extreme which = Extreme::Nearest;    // ExtremeShape

  static SubgoalFact shape_area(Color c, std::int64_t v) { return {SubgoalKind::ShapeArea, c, v, Extreme::Nearest}; }
  static SubgoalFact distance(Color c, std::int64_t v) { return {SubgoalKind::Distance, c, v, Extreme::Nearest}; }
  static SubgoalFact extreme(Extreme w, Color c) { return {SubgoalKind::ExtremeShape, c, 0, w}; }

  friend bool operator==(const SubgoalFact&, const SubgoalFact&) = default;
};

struct ReferenceTrace {
  std::string caption;
  std::string think;
  std::string answer_text;
  std::string sft_target;
  std::string rlground_target;
  std::vector<SubgoalFact> subgoals;
  friend bool operator==(const ReferenceTrace&, const ReferenceTrace&) = default;
};

struct TaskInstance {
  std::string id;
  TaskCode code = TaskCode::MM_GR;
  std::string split;
  std::uint64_t index = 0;
  std::uint64_t seed = 0;  // per-record seed the scene was sampled from
  GrMode gr_mode = GrMode::Total;
  std::string question;
  std::optional<std::string> scene_text;
  std::optional<std::string> image_ref;
  Answer answer;
  ReferenceTrace trace;
  Scene scene;
  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

namespace detail {

inline const FreeScene& free_scene_for(const Scene& scene, TaskCode code) {
  if (uses_grid(code) || !std::holds_alternative<FreeScene>(scene))
    throw std::invalid_argument("task " + std::string(to_string(code)) + " needs a " +
                                (uses_grid(code) ? "grid" : "free-layout") + " scene");
  return std::get<FreeScene>(scene);
}

inline const GridScene& grid_scene_for(const Scene& scene, TaskCode code) {
  if (!uses_grid(code) || !std::holds_alternative<GridScene>(scene))
    throw std::invalid_argument("task " + std::string(to_string(code)) + " needs a " +
                                (uses_grid(code) ? "grid" : "free-layout") + " scene");
  return std::get<GridScene>(scene);
}

inline std::string describe(const Shape& s) {
  return std::string(s.color().name()) + " " + std::string(kind_name(s.kind()));
}

inline std::string cell_text(Cell c) { return "(" + std::to_string(c.row) + ", " + std::to_string(c.col) + ")"; }

inline std::string shape_sentence_body(const Shape& s) {
  using std::to_string;
  const std::string color(s.color().name());
  const std::string article = (color[0] == 'o') ? "An " : "A ";
  return article + color + " " + std::string(kind_name(s.kind())) + " with " +
         std::visit(
             [](const auto& d) -> std::string {
               using T = std::decay_t<decltype(d)>;
               if constexpr (std::is_same_v<T, SquareDims>) return "side " + to_string(d.side) + " units";
               else if constexpr (std::is_same_v<T, RectangleDims>)
                 return "width " + to_string(d.width) + " units and height " + to_string(d.height) + " units";
               else if constexpr (std::is_same_v<T, RightTriangleDims>)
                 return "legs " + to_string(d.leg_a) + " units and " + to_string(d.leg_b) + " units";
               else
                 return "parallel sides " + to_string(d.base_a) + " units and " + to_string(d.base_b) +
                        " units and height " + to_string(d.height) + " units";
             },
             s.dims());
}

}  // namespace detail

// One sentence per shape (plus a grid header line for grid scenes).
inline std::string render_scene_text(const Scene& scene) {
  std::string out;
  if (const auto* f = std::get_if<FreeScene>(&scene)) {
    out = "The scene contains " + std::to_string(f->shapes.size()) + " shapes.";
    for (const auto& p : f->shapes) out += "\n" + detail::shape_sentence_body(p.shape) + ".";
  } else {
    const auto& g = std::get<GridScene>(scene);
    out = "The grid has " + std::to_string(g.grid_n) + " rows and " + std::to_string(g.grid_n) +
          " columns; rows are numbered from 1 at the top and columns from 1 at the left.";
    for (const auto& p : g.placements)
      out += "\n" + detail::shape_sentence_body(p.shape) + " is at " + detail::cell_text(p.cell) + ".";
  }
  return out;
}

// Rounding is applied per shape before any summation.
inline Answer ground_truth(const Scene& scene, TaskCode code, GrMode gr_mode = GrMode::Total) {
  const TaskCodeInfo ci = info(code);
  if (ci.family == TaskFamily::GR) {
    const FreeScene& s = detail::free_scene_for(scene, code);
    if (ci.ood) {
      auto i = largest_index(s);
      if (!i) throw IllPosedScene("no unique largest shape");
      return IntegerArea{rounded_area(s.shapes[*i].shape)};
    }
    if (gr_mode == GrMode::Single) return IntegerArea{rounded_area(s.shapes.at(s.query_index).shape)};
    std::int64_t total = 0;
    for (const auto& p : s.shapes) total += rounded_area(p.shape);
    return IntegerArea{total};
  }
  const GridScene& g = detail::grid_scene_for(scene, code);
  const Extreme which = ci.ood ? Extreme::Farthest : Extreme::Nearest;
  const std::size_t other = require_extreme(g, which);
  if (ci.family == TaskFamily::SR) return g.placements[other].cell;
  const std::int64_t a = rounded_area(g.target().shape), b = rounded_area(g.placements[other].shape);
  return IntegerArea{ci.ood ? std::max(a, b) : a + b};
}

inline std::string render_question(TaskCode code, const Scene& scene, GrMode gr_mode = GrMode::Total) {
  const TaskCodeInfo ci = info(code);
  constexpr std::string_view kRound = "rounded to the nearest integer (halves round up)";
  constexpr std::string_view kInt = " Answer with a single integer.";
  std::string preamble, body;
  if (ci.family == TaskFamily::GR) {
    const FreeScene& s = detail::free_scene_for(scene, code);
    preamble = ci.pure_text ? render_scene_text(scene)
                            : "The image shows several geometric shapes with their dimensions labeled in units.";
    if (ci.ood)
      body = "Which shape has the largest area? Report its area " + std::string(kRound) + "." + std::string(kInt);
    else if (gr_mode == GrMode::Single)
      body = "What is the area of the " + detail::describe(s.shapes.at(s.query_index).shape) + ", " +
             std::string(kRound) + "?" + std::string(kInt);
    else
      body = "What is the total area of all the shapes? Use each shape's area " + std::string(kRound) +
             " and add them up." + std::string(kInt);
  } else {
    const GridScene& g = detail::grid_scene_for(scene, code);
    const std::string n = std::to_string(g.grid_n);
    preamble = ci.pure_text ? render_scene_text(scene)
                            : "The image shows shapes placed on a " + n + "x" + n +
                                  " grid, each labeled with its dimensions in units. Rows are numbered from 1 at the "
                                  "top and columns from 1 at the left.";
    const std::string target = "the " + detail::describe(g.target().shape);
    const std::string rel = ci.ood ? "farthest from" : "closest to";
    if (ci.family == TaskFamily::SR) {
      body = "Which shape is " + rel + " " + target + " in Manhattan distance? Answer with its grid position as (row, col).";
    } else if (!ci.ood) {
      body = "Find the shape closest to " + target + " in Manhattan distance. What is the combined area of " + target +
             " and that closest shape? Use each area " + std::string(kRound) + " and add them." + std::string(kInt);
    } else {
      body = "Find the shape farthest from " + target + " in Manhattan distance. Of " + target +
             " and that farthest shape, which has the larger area? Report that area " + std::string(kRound) + "." +
             std::string(kInt);
    }
  }
  return preamble + "\n\n" + body;
}

inline ReferenceTrace build_trace(const Scene& scene, TaskCode code, GrMode gr_mode = GrMode::Total) {
  const TaskCodeInfo ci = info(code);
  const Answer answer = ground_truth(scene, code, gr_mode);
  ReferenceTrace t;
  t.caption = render_scene_text(scene);
  std::string& think = t.think;
  auto area_line = [](const Shape& s) { return detail::describe(s) + ": " + area_formula_latex(s); };

  if (ci.family == TaskFamily::GR) {
    const FreeScene& s = detail::free_scene_for(scene, code);
    if (!ci.ood && gr_mode == GrMode::Single) {
      const Shape& q = s.shapes.at(s.query_index).shape;
      think = "The question asks about the " + detail::describe(q) + ".\n" + area_line(q) + "\nThe area is " +
              answer_text(answer) + ".";
      t.subgoals.push_back(SubgoalFact::shape_area(q.color(), rounded_area(q)));
    } else {
      think = "Compute the area of each shape.";
      std::string sum;
      for (const auto& p : s.shapes) {
        think += "\n" + area_line(p.shape);
        sum += (sum.empty() ? "" : " + ") + std::to_string(rounded_area(p.shape));
        t.subgoals.push_back(SubgoalFact::shape_area(p.shape.color(), rounded_area(p.shape)));
      }
      if (ci.ood) {
        const Shape& big = s.shapes[*largest_index(s)].shape;
        think += "\nComparing the areas, the largest shape is the " + detail::describe(big) + " with area " +
                 answer_text(answer) + ".";
      } else {
        think += "\nTotal area: " + sum + " = " + answer_text(answer) + ".";
      }
    }
  } else {
    const GridScene& g = detail::grid_scene_for(scene, code);
    const Cell tc = g.target().cell;
    think = "The target is the " + detail::describe(g.target().shape) + " at " + detail::cell_text(tc) + ".";
    for (const auto& [i, d] : target_distances(g)) {
      const auto& p = g.placements[i];
      const int dr = std::abs(tc.row - p.cell.row), dc = std::abs(tc.col - p.cell.col);
      think += "\nDistance to the " + detail::describe(p.shape) + " at " + detail::cell_text(p.cell) + ": |" +
               std::to_string(tc.row) + " - " + std::to_string(p.cell.row) + "| + |" + std::to_string(tc.col) + " - " +
               std::to_string(p.cell.col) + "| = " + std::to_string(dr) + " + " + std::to_string(dc) + " = " +
               std::to_string(d) + ".";
      t.subgoals.push_back(SubgoalFact::distance(p.shape.color(), d));
    }
    const Extreme which = ci.ood ? Extreme::Farthest : Extreme::Nearest;
    const std::size_t oi = require_extreme(g, which);
    const auto& other = g.placements[oi];
    think += "\nThe " + std::string(to_string(which)) + " shape to the target is the " + detail::describe(other.shape) +
             " at " + detail::cell_text(other.cell) + " with distance " +
             std::to_string(manhattan(tc, other.cell)) + ".";
    t.subgoals.push_back(SubgoalFact::extreme(which, other.shape.color()));
    if (ci.family == TaskFamily::COMP) {
      const std::int64_t a = rounded_area(g.target().shape), b = rounded_area(other.shape);
      think += "\nArea of the target, the " + area_line(g.target().shape);
      think += "\nArea of the " + std::string(to_string(which)) + " shape, the " + area_line(other.shape);
      if (!ci.ood)
        think += "\nCombined area: " + std::to_string(a) + " + " + std::to_string(b) + " = " + answer_text(answer) + ".";
      else
        think += "\nThe larger of " + std::to_string(a) + " and " + std::to_string(b) + " is " + answer_text(answer) + ".";
      t.subgoals.push_back(SubgoalFact::shape_area(g.target().shape.color(), a));
      t.subgoals.push_back(SubgoalFact::shape_area(other.shape.color(), b));
    }
  }
  t.answer_text = answer_text(answer);
  t.sft_target = "<think>" + t.think + "</think><answer>" + t.answer_text + "</answer>";
  t.rlground_target = "<caption>" + t.caption + "</caption>" + t.sft_target;
  return t;
}

inline std::string task_id(TaskCode code, std::string_view split, std::uint64_t base_seed, std::uint64_t index) {
  const auto h = Fnv1a{}.add(kBenchmarkVersion).add(to_string(code)).add(split).add(base_seed).add(index).value();
  return std::string(info(code).cli) + "-" + to_hex(h);
}

inline TaskInstance make_instance(TaskCode code, Scene scene, GrMode gr_mode = GrMode::Total) {
  TaskInstance inst;
  inst.code = code;
  inst.gr_mode = gr_mode;
  inst.answer = ground_truth(scene, code, gr_mode);
  inst.question = render_question(code, scene, gr_mode);
  inst.trace = build_trace(scene, code, gr_mode);
  if (info(code).pure_text) inst.scene_text = render_scene_text(scene);
  inst.scene = std::move(scene);
  return inst;
}

// Samples the scene for record `index` of a split and builds its instance.
inline TaskInstance generate_instance(TaskCode code, std::string_view split, std::uint64_t base_seed,
                                      std::uint64_t index, const GenConfig& cfg) {
  const std::uint64_t seed = derive_seed(base_seed, split, index);
  SceneRng rng(seed);
  Scene scene = uses_grid(code)
                    ? Scene(sample_grid_scene(rng, cfg, cfg.require_unique_extremes))
                    : Scene(sample_free_scene(rng, cfg, info(code).ood));
  TaskInstance inst = make_instance(code, std::move(scene), cfg.gr_mode);
  inst.id = task_id(code, split, base_seed, index);
  inst.split = std::string(split);
  inst.index = index;
  inst.seed = seed;
  if (!info(code).pure_text) inst.image_ref = "images/" + inst.id + ".png";
  return inst;
}

}  // namespace compabench
