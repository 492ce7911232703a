#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "compabench/rng.hpp"
#include "compabench/task.hpp"

namespace compabench {

// Scripted completion generators of controlled quality.
enum class AgentKind : std::uint8_t {
  Oracle,           // emits sft_target
  CaptionOracle,    // emits rlground_target
  Blind,            // well-formed, ignores the scene, random type-valid answer
  SubskillArea,     // answers only the target's (or queried shape's) area
  SubskillSpatial,  // answers the nearest cell even where an area is expected
  PartialProgress,  // rlground_target with a corrupted final answer
  Malformed,        // tag-free prose
};

inline constexpr std::array<AgentKind, 7> kAllAgents = {AgentKind::Oracle,          AgentKind::CaptionOracle,
                                                       AgentKind::Blind,           AgentKind::SubskillArea,
                                                       AgentKind::SubskillSpatial, AgentKind::PartialProgress,
                                                       AgentKind::Malformed};

inline std::string_view to_string(AgentKind a) {
  switch (a) {
    case AgentKind::Oracle: return "oracle";
    case AgentKind::CaptionOracle: return "caption_oracle";
    case AgentKind::Blind: return "blind";
    case AgentKind::SubskillArea: return "subskill_area";
    case AgentKind::SubskillSpatial: return "subskill_spatial";
    case AgentKind::PartialProgress: return "partial_progress";
    case AgentKind::Malformed: return "malformed";
  }
  return "?";
}

inline std::optional<AgentKind> agent_from_string(std::string_view s) {
  for (AgentKind a : kAllAgents)
    if (to_string(a) == s) return a;
  return std::nullopt;
}

// Upper end of Blind's uniform integer guesses: the largest answer a task can
// have with the default 12-unit dimension cap (one shape is at most 144).
inline std::int64_t blind_integer_cap(TaskCode code, GrMode gr_mode) {
  constexpr std::int64_t kMaxShapeArea = 144;
  const TaskCodeInfo ci = info(code);
  if (ci.family == TaskFamily::GR) return (ci.ood || gr_mode == GrMode::Single) ? kMaxShapeArea : 6 * kMaxShapeArea;
  if (ci.family == TaskFamily::COMP) return ci.ood ? kMaxShapeArea : 2 * kMaxShapeArea;
  return kMaxShapeArea;
}

inline std::string respond(AgentKind agent, const TaskInstance& inst, std::uint64_t seed) {
  SceneRng rng(mix64(Fnv1a{}.add(seed).add(inst.id).add(static_cast<std::uint64_t>(agent)).value()));
  const auto* grid = std::get_if<GridScene>(&inst.scene);
  const auto* free = std::get_if<FreeScene>(&inst.scene);

  switch (agent) {
    case AgentKind::Oracle: return inst.trace.sft_target;
    case AgentKind::CaptionOracle: return inst.trace.rlground_target;

    case AgentKind::Blind: {
      std::string guess;
      if (answer_kind(inst.code) == AnswerKind::Cell) {
        // The grid size is stated in the question, so it is not scene content.
        const int n = grid ? grid->grid_n : 3;
        guess = answer_text(Cell{rng.uniform_int(1, n), rng.uniform_int(1, n)});
      } else {
        guess = std::to_string(rng.uniform(1, blind_integer_cap(inst.code, inst.gr_mode)));
      }
      return "<caption>An image with some shapes.</caption><think>I will estimate the answer without examining the "
             "shapes.</think><answer>" +
             guess + "</answer>";
    }

    case AgentKind::SubskillArea: {
      const Shape& s = grid ? grid->target().shape : free->shapes.at(free->query_index).shape;
      return "<think>Area of the " + std::string(s.color().name()) + " " + std::string(kind_name(s.kind())) + ": " +
             area_formula_latex(s) + "</think><answer>" + std::to_string(rounded_area(s)) + "</answer>";
    }

    case AgentKind::SubskillSpatial: {
      if (!grid) return "<think>I look for the closest shape on the grid.</think><answer>(1, 1)</answer>";
      if (!extreme_index(*grid, Extreme::Nearest))
        return "<think>Several shapes are equally close.</think><answer>(1, 1)</answer>";
      const ReferenceTrace t = build_trace(inst.scene, TaskCode::MM_SR);
      return t.sft_target;
    }

    case AgentKind::PartialProgress: {
      std::string wrong;
      if (const auto* v = std::get_if<IntegerArea>(&inst.answer)) {
        wrong = std::to_string(v->value + rng.uniform_int(1, 5));
      } else {
        const Cell truth = std::get<Cell>(inst.answer);
        const int n = grid ? grid->grid_n : 3;
        Cell c = truth;
        while (c == truth) c = Cell{rng.uniform_int(1, n), rng.uniform_int(1, n)};
        wrong = answer_text(c);
      }
      return "<caption>" + inst.trace.caption + "</caption><think>" + inst.trace.think + "</think><answer>" + wrong +
             "</answer>";
    }

    case AgentKind::Malformed: {
      constexpr std::array<std::string_view, 3> openers = {"Looking at the shapes", "After some thought",
                                                           "From the picture"};
      return std::string(openers[rng.index(openers.size())]) + ", I believe the answer is " + inst.trace.answer_text +
             ".";
    }
  }
  return {};
}

}  // namespace compabench
