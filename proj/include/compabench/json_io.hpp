#pragma once

#include <string>
#include <variant>

#include "compabench/config.hpp"
#include "compabench/error.hpp"
#include "compabench/reward.hpp"
#include "compabench/scene.hpp"
#include "compabench/task.hpp"

// JSON mapping of records, scenes and reward outputs. Field names are part of
// the v1 manifest and wire schema.
namespace compabench {

class SchemaError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline const Json& field(const Json& obj, const char* key) {
  if (!obj.is_object()) throw SchemaError(std::string("expected an object holding '") + key + "'");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get(const Json& obj, const char* key) {
  const Json& v = field(obj, key);
  try {
    return v.get<T>();
  } catch (const Json::exception&) {
    throw SchemaError(std::string("field '") + key + "' has the wrong type");
  }
}

inline int get_int(const Json& obj, const char* key) {
  const Json& v = field(obj, key);
  if (!v.is_number_integer()) throw SchemaError(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

inline Color color_field(const Json& obj, const char* key) {
  auto c = Color::from_name(get<std::string>(obj, key));
  if (!c) throw SchemaError(std::string("unknown color in '") + key + "'");
  return *c;
}

}  // namespace detail

inline Json dims_to_json(const Dimensions& dims) {
  return std::visit(
      [](const auto& d) -> Json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, SquareDims>) return {{"side", d.side}};
        else if constexpr (std::is_same_v<T, RectangleDims>) return {{"width", d.width}, {"height", d.height}};
        else if constexpr (std::is_same_v<T, RightTriangleDims>) return {{"leg_a", d.leg_a}, {"leg_b", d.leg_b}};
        else return {{"base_a", d.base_a}, {"base_b", d.base_b}, {"height", d.height}};
      },
      dims);
}

inline Json shape_to_json(const Shape& s) {
  return {{"kind", std::string(kind_id(s.kind()))}, {"color", std::string(s.color().name())}, {"dims", dims_to_json(s.dims())}};
}

inline Shape shape_from_json(const Json& j) {
  using detail::get_int;
  const auto kind = kind_from_id(detail::get<std::string>(j, "kind"));
  if (!kind) throw SchemaError("unknown shape kind");
  const Json& d = detail::field(j, "dims");
  Dimensions dims;
  switch (*kind) {
    case ShapeKind::Square: dims = SquareDims{get_int(d, "side")}; break;
    case ShapeKind::Rectangle: dims = RectangleDims{get_int(d, "width"), get_int(d, "height")}; break;
    case ShapeKind::RightTriangle: dims = RightTriangleDims{get_int(d, "leg_a"), get_int(d, "leg_b")}; break;
    case ShapeKind::Trapezoid: dims = TrapezoidDims{get_int(d, "base_a"), get_int(d, "base_b"), get_int(d, "height")}; break;
  }
  try {
    return Shape(dims, detail::color_field(j, "color"));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
}

inline Json scene_to_json(const Scene& scene) {
  if (const auto* f = std::get_if<FreeScene>(&scene)) {
    Json shapes = Json::array();
    for (const auto& p : f->shapes) {
      Json s = shape_to_json(p.shape);
      s["x"] = p.x;
      s["y"] = p.y;
      shapes.push_back(std::move(s));
    }
    return {{"type", "free"},
            {"canvas", {{"width", f->canvas_w}, {"height", f->canvas_h}}},
            {"px_per_unit", f->px_per_unit},
            {"label_margin_px", f->label_margin_px},
            {"query_index", f->query_index},
            {"shapes", std::move(shapes)}};
  }
  const auto& g = std::get<GridScene>(scene);
  Json shapes = Json::array();
  for (const auto& p : g.placements) {
    Json s = shape_to_json(p.shape);
    s["cell"] = {{"row", p.cell.row}, {"col", p.cell.col}};
    shapes.push_back(std::move(s));
  }
  return {{"type", "grid"},          {"grid_n", g.grid_n},           {"cell_px", g.cell_px},
          {"px_per_unit", g.px_per_unit}, {"target_index", g.target_index}, {"shapes", std::move(shapes)}};
}

inline Scene scene_from_json(const Json& j) {
  using detail::get_int;
  const std::string type = detail::get<std::string>(j, "type");
  const Json& shapes = detail::field(j, "shapes");
  if (!shapes.is_array()) throw SchemaError("'shapes' must be an array");
  auto index_field = [&](const char* key) {
    const Json& v = detail::field(j, key);
    if (!v.is_number_unsigned() || v.get<std::size_t>() >= shapes.size())
      throw SchemaError(std::string("'") + key + "' out of range");
    return v.get<std::size_t>();
  };
  if (type == "free") {
    FreeScene f;
    const Json& canvas = detail::field(j, "canvas");
    f.canvas_w = get_int(canvas, "width");
    f.canvas_h = get_int(canvas, "height");
    f.px_per_unit = get_int(j, "px_per_unit");
    f.label_margin_px = get_int(j, "label_margin_px");
    for (const auto& s : shapes) f.shapes.push_back({shape_from_json(s), get_int(s, "x"), get_int(s, "y")});
    f.query_index = index_field("query_index");
    return f;
  }
  if (type == "grid") {
    GridScene g;
    g.grid_n = get_int(j, "grid_n");
    g.cell_px = get_int(j, "cell_px");
    g.px_per_unit = get_int(j, "px_per_unit");
    for (const auto& s : shapes) {
      const Json& c = detail::field(s, "cell");
      g.placements.push_back({shape_from_json(s), Cell{get_int(c, "row"), get_int(c, "col")}});
    }
    g.target_index = index_field("target_index");
    return g;
  }
  throw SchemaError("unknown scene type '" + type + "'");
}

inline Json answer_to_json(const Answer& a) {
  if (const auto* v = std::get_if<IntegerArea>(&a)) return {{"type", "integer"}, {"value", v->value}};
  const auto& c = std::get<Cell>(a);
  return {{"type", "cell"}, {"row", c.row}, {"col", c.col}};
}

inline Answer answer_from_json(const Json& j) {
  const std::string type = detail::get<std::string>(j, "type");
  if (type == "integer") return IntegerArea{detail::get<std::int64_t>(j, "value")};
  if (type == "cell") return Cell{detail::get_int(j, "row"), detail::get_int(j, "col")};
  throw SchemaError("unknown answer type '" + type + "'");
}

inline Json subgoal_to_json(const SubgoalFact& g) {
  switch (g.kind) {
    case SubgoalKind::ShapeArea:
      return {{"kind", "shape_area"}, {"color", std::string(g.color.name())}, {"value", g.value}};
    case SubgoalKind::Distance:
      return {{"kind", "distance"}, {"color", std::string(g.color.name())}, {"value", g.value}};
    case SubgoalKind::ExtremeShape:
      return {{"kind", "extreme_shape"}, {"which", std::string(to_string(g.which))}, {"color", std::string(g.color.name())}};
  }
  return {};
}

inline SubgoalFact subgoal_from_json(const Json& j) {
  const std::string kind = detail::get<std::string>(j, "kind");
  const Color c = detail::color_field(j, "color");
  if (kind == "shape_area") return SubgoalFact::shape_area(c, detail::get<std::int64_t>(j, "value"));
  if (kind == "distance") return SubgoalFact::distance(c, detail::get<std::int64_t>(j, "value"));
  if (kind == "extreme_shape") {
    const std::string which = detail::get<std::string>(j, "which");
    if (which != "nearest" && which != "farthest") throw SchemaError("unknown extreme '" + which + "'");
    return SubgoalFact::extreme(which == "nearest" ? Extreme::Nearest : Extreme::Farthest, c);
  }
  throw SchemaError("unknown subgoal kind '" + kind + "'");
}

inline Json trace_to_json(const ReferenceTrace& t) {
  Json goals = Json::array();
  for (const auto& g : t.subgoals) goals.push_back(subgoal_to_json(g));
  return {{"caption", t.caption},       {"think", t.think},
          {"answer_text", t.answer_text}, {"sft_target", t.sft_target},
          {"rlground_target", t.rlground_target}, {"subgoals", std::move(goals)}};
}

inline ReferenceTrace trace_from_json(const Json& j) {
  ReferenceTrace t;
  t.caption = detail::get<std::string>(j, "caption");
  t.think = detail::get<std::string>(j, "think");
  t.answer_text = detail::get<std::string>(j, "answer_text");
  t.sft_target = detail::get<std::string>(j, "sft_target");
  t.rlground_target = detail::get<std::string>(j, "rlground_target");
  const Json& goals = detail::field(j, "subgoals");
  if (!goals.is_array()) throw SchemaError("'subgoals' must be an array");
  for (const auto& g : goals) t.subgoals.push_back(subgoal_from_json(g));
  return t;
}

// include_answer=false drops "answer" and "trace" (which restates the answer).
inline Json instance_to_json(const TaskInstance& inst, bool include_answer = true) {
  Json j = {{"id", inst.id},
            {"code", std::string(to_string(inst.code))},
            {"split", inst.split},
            {"index", inst.index},
            {"seed", inst.seed}};
  if (info(inst.code).family == TaskFamily::GR) j["gr_mode"] = std::string(to_string(inst.gr_mode));
  j["question"] = inst.question;
  if (inst.scene_text) j["scene_text"] = *inst.scene_text;
  if (inst.image_ref) j["image_ref"] = *inst.image_ref;
  if (include_answer) {
    j["answer"] = answer_to_json(inst.answer);
    j["trace"] = trace_to_json(inst.trace);
  }
  j["scene"] = scene_to_json(inst.scene);
  return j;
}

inline TaskInstance instance_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("record must be a JSON object");
  TaskInstance inst;
  inst.id = detail::get<std::string>(j, "id");
  const auto code = task_code_from_string(detail::get<std::string>(j, "code"));
  if (!code) throw SchemaError("unknown task code");
  inst.code = *code;
  inst.split = detail::get<std::string>(j, "split");
  inst.index = detail::get<std::uint64_t>(j, "index");
  inst.seed = detail::get<std::uint64_t>(j, "seed");
  if (info(inst.code).family == TaskFamily::GR) {
    const std::string m = detail::get<std::string>(j, "gr_mode");
    if (m != "total" && m != "single") throw SchemaError("unknown gr_mode '" + m + "'");
    inst.gr_mode = m == "total" ? GrMode::Total : GrMode::Single;
  }
  inst.question = detail::get<std::string>(j, "question");
  if (j.contains("scene_text")) inst.scene_text = detail::get<std::string>(j, "scene_text");
  if (j.contains("image_ref")) inst.image_ref = detail::get<std::string>(j, "image_ref");
  inst.answer = answer_from_json(detail::field(j, "answer"));
  inst.trace = trace_from_json(detail::field(j, "trace"));
  inst.scene = scene_from_json(detail::field(j, "scene"));
  return inst;
}

inline Json breakdown_to_json(const RewardBreakdown& r) {
  Json hits = Json::array();
  for (bool h : r.subgoal_hits) hits.push_back(h);
  return {{"accuracy", r.accuracy}, {"format", r.format},         {"caption", r.caption},
          {"progress", r.progress}, {"subgoal_hits", std::move(hits)}, {"total", r.total}};
}

inline RewardBreakdown breakdown_from_json(const Json& j) {
  RewardBreakdown r;
  r.accuracy = detail::get<double>(j, "accuracy");
  r.format = detail::get<double>(j, "format");
  r.caption = detail::get<double>(j, "caption");
  r.progress = detail::get<double>(j, "progress");
  for (const auto& h : detail::field(j, "subgoal_hits")) r.subgoal_hits.push_back(h.get<bool>());
  r.total = detail::get<double>(j, "total");
  return r;
}

}  // namespace compabench
