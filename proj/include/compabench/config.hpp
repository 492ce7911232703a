#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "compabench/error.hpp"
#include "compabench/geometry.hpp"
#include "compabench/rng.hpp"

namespace compabench {

using Json = nlohmann::ordered_json;

enum class GrMode : std::uint8_t { Total, Single };

inline std::string_view to_string(GrMode m) { return m == GrMode::Total ? "total" : "single"; }

// Scene sampling parameters. Lengths are abstract units, canvas values pixels.
struct GenConfig {
  int grid_min = 3;
  int grid_max = 10;
  int shapes_min = 2;
  int shapes_max = 6;
  int dim_min = 2;
  int dim_max = 12;

  int canvas_px = 512;  // free-layout scenes are square
  int cell_px_max = 100;
  int canvas_cap_px = 1000;

  // Free layouts start at px_per_unit and shrink by px_shrink_step down to
  // min_px_per_unit; each level gets attempts_per_level placement attempts.
  int px_per_unit = 12;
  int min_px_per_unit = 4;
  int px_shrink_step = 2;
  int attempts_per_level = 200;
  int label_margin_px = 28;

  // Content resamples allowed while enforcing uniqueness constraints.
  int retry_budget = 1000;

  // Grid shapes fit inside this percentage of a cell.
  int grid_fill_percent = 50;

  GrMode gr_mode = GrMode::Total;
  bool require_unique_extremes = true;
  bool allow_eval_only_train = false;

  int grid_cell_px(int grid_n) const { return std::min(cell_px_max, canvas_cap_px / grid_n); }

  void validate() const {
    auto check = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string("generation config: ") + what);
    };
    check(grid_min >= 3 && grid_max <= 10 && grid_min <= grid_max, "grid range must lie in 3..10");
    check(shapes_min >= 2 && shapes_max <= 6 && shapes_min <= shapes_max, "shape count range must lie in 2..6");
    check(dim_min >= 1 && dim_max <= 1000 && dim_min < dim_max, "dimension range must satisfy 1 <= min < max <= 1000");
    check(canvas_px >= 64 && canvas_px <= 4096, "canvas_px out of range");
    check(cell_px_max >= 16 && canvas_cap_px >= cell_px_max * 3, "cell/canvas sizes out of range");
    check(min_px_per_unit >= 1 && px_per_unit >= min_px_per_unit && px_shrink_step >= 1, "pixel scale levels");
    check(attempts_per_level >= 1 && retry_budget >= 1, "retry budgets must be positive");
    check(label_margin_px >= 0, "label margin must be non-negative");
    check(grid_fill_percent >= 10 && grid_fill_percent <= 100, "grid_fill_percent out of range");
  }
};

// Drawing style. Canvas sizes come from the scene.
struct RenderSpec {
  int stroke_px = 2;
  int font_px = 16;
  int grid_line_px = 1;
  std::string background = "#ffffff";
  std::string stroke_color = "#000000";
  std::string label_color = "#000000";
  std::string grid_color = "#c8c8c8";

  void validate() const {
    if (stroke_px < 1 || font_px < 16 || grid_line_px < 1)
      throw ConfigError("render config: stroke >= 1, font >= 16, grid line >= 1 required");
    for (const std::string* c : {&background, &stroke_color, &label_color, &grid_color}) {
      const bool ok = c->size() == 7 && (*c)[0] == '#' &&
                      c->find_first_not_of("0123456789abcdefABCDEF", 1) == std::string::npos;
      if (!ok) throw ConfigError("render config: colors must be #rrggbb, got " + *c);
    }
  }
};

enum class RewardMode : std::uint8_t { Baseline, CaptionOnly, ProgressOnly, RlGround };

inline std::string_view to_string(RewardMode m) {
  switch (m) {
    case RewardMode::Baseline: return "baseline";
    case RewardMode::CaptionOnly: return "caption_only";
    case RewardMode::ProgressOnly: return "progress_only";
    case RewardMode::RlGround: return "rl_ground";
  }
  return "?";
}

inline std::optional<RewardMode> reward_mode_from_string(std::string_view s) {
  for (RewardMode m : {RewardMode::Baseline, RewardMode::CaptionOnly, RewardMode::ProgressOnly, RewardMode::RlGround})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

constexpr bool caption_active(RewardMode m) { return m == RewardMode::CaptionOnly || m == RewardMode::RlGround; }
constexpr bool progress_active(RewardMode m) { return m == RewardMode::ProgressOnly || m == RewardMode::RlGround; }

struct RewardConfig {
  double w_accuracy = 1.0;
  double w_format = 0.5;
  double w_caption = 0.25;
  double w_progress_total = 0.5;
  RewardMode mode = RewardMode::RlGround;
  // A think block with more than this many times the scene's numeric tokens
  // earns no progress.
  int progress_token_cap_factor = 10;

  void validate() const {
    if (w_accuracy < 0 || w_format < 0 || w_caption < 0 || w_progress_total < 0)
      throw ConfigError("reward config: weights must be non-negative");
    if (progress_token_cap_factor < 1) throw ConfigError("reward config: progress_token_cap_factor must be >= 1");
  }
};

struct GrpoConfig {
  int group_size = 8;
  double beta = 0.0;
  double epsilon_std = 1e-8;

  void validate() const {
    if (group_size < 2) throw ConfigError("grpo config: group_size must be >= 2");
    if (!(beta >= 0)) throw ConfigError("grpo config: beta must be >= 0");
    if (!(epsilon_std > 0)) throw ConfigError("grpo config: epsilon_std must be > 0");
  }
};

struct Config {
  GenConfig gen;
  RenderSpec render;
  RewardConfig reward;
  GrpoConfig grpo;

  void validate() const {
    gen.validate();
    render.validate();
    reward.validate();
    grpo.validate();
  }
};

namespace detail {

template <typename T>
void read_key(const Json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const Json& obj, std::string_view section, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) throw ConfigError("config section '" + std::string(section) + "' must be an object");
  for (const auto& [k, _] : obj.items()) {
    bool known = false;
    for (auto key : keys) known = known || key == k;
    if (!known) throw ConfigError("unknown config key '" + std::string(section) + "." + k + "'");
  }
}

}  // namespace detail

inline Json to_json(const Config& c) {
  return Json{
      {"generation",
       {{"grid_min", c.gen.grid_min},
        {"grid_max", c.gen.grid_max},
        {"shapes_min", c.gen.shapes_min},
        {"shapes_max", c.gen.shapes_max},
        {"dim_min", c.gen.dim_min},
        {"dim_max", c.gen.dim_max},
        {"canvas_px", c.gen.canvas_px},
        {"cell_px_max", c.gen.cell_px_max},
        {"canvas_cap_px", c.gen.canvas_cap_px},
        {"px_per_unit", c.gen.px_per_unit},
        {"min_px_per_unit", c.gen.min_px_per_unit},
        {"px_shrink_step", c.gen.px_shrink_step},
        {"attempts_per_level", c.gen.attempts_per_level},
        {"label_margin_px", c.gen.label_margin_px},
        {"retry_budget", c.gen.retry_budget},
        {"grid_fill_percent", c.gen.grid_fill_percent},
        {"gr_mode", std::string(to_string(c.gen.gr_mode))},
        {"require_unique_extremes", c.gen.require_unique_extremes},
        {"allow_eval_only_train", c.gen.allow_eval_only_train}}},
      {"render",
       {{"stroke_px", c.render.stroke_px},
        {"font_px", c.render.font_px},
        {"grid_line_px", c.render.grid_line_px},
        {"background", c.render.background},
        {"stroke_color", c.render.stroke_color},
        {"label_color", c.render.label_color},
        {"grid_color", c.render.grid_color}}},
      {"reward",
       {{"w_accuracy", c.reward.w_accuracy},
        {"w_format", c.reward.w_format},
        {"w_caption", c.reward.w_caption},
        {"w_progress_total", c.reward.w_progress_total},
        {"mode", std::string(to_string(c.reward.mode))},
        {"progress_token_cap_factor", c.reward.progress_token_cap_factor}}},
      {"grpo",
       {{"group_size", c.grpo.group_size}, {"beta", c.grpo.beta}, {"epsilon_std", c.grpo.epsilon_std}}},
  };
}

inline void apply_reward_json(const Json& j, RewardConfig& r) {
  detail::reject_unknown(j, "reward",
                         {"w_accuracy", "w_format", "w_caption", "w_progress_total", "mode", "progress_token_cap_factor"});
  detail::read_key(j, "w_accuracy", r.w_accuracy);
  detail::read_key(j, "w_format", r.w_format);
  detail::read_key(j, "w_caption", r.w_caption);
  detail::read_key(j, "w_progress_total", r.w_progress_total);
  detail::read_key(j, "progress_token_cap_factor", r.progress_token_cap_factor);
  if (j.contains("mode")) {
    std::string m;
    detail::read_key(j, "mode", m);
    auto mode = reward_mode_from_string(m);
    if (!mode) throw ConfigError("unknown reward mode '" + m + "'");
    r.mode = *mode;
  }
}

inline void apply_grpo_json(const Json& j, GrpoConfig& g) {
  detail::reject_unknown(j, "grpo", {"group_size", "beta", "epsilon_std"});
  detail::read_key(j, "group_size", g.group_size);
  detail::read_key(j, "beta", g.beta);
  detail::read_key(j, "epsilon_std", g.epsilon_std);
}

// Overlays the keys present in `j` onto `base`; unknown keys are rejected.
inline Config config_from_json(const Json& j, Config base = {}) {
  detail::reject_unknown(j, "", {"generation", "render", "reward", "grpo"});
  if (j.contains("generation")) {
    const Json& g = j["generation"];
    detail::reject_unknown(g, "generation",
                           {"grid_min", "grid_max", "shapes_min", "shapes_max", "dim_min", "dim_max", "canvas_px",
                            "cell_px_max", "canvas_cap_px", "px_per_unit", "min_px_per_unit", "px_shrink_step",
                            "attempts_per_level", "label_margin_px", "retry_budget", "grid_fill_percent", "gr_mode",
                            "require_unique_extremes", "allow_eval_only_train"});
    auto& c = base.gen;
    detail::read_key(g, "grid_min", c.grid_min);
    detail::read_key(g, "grid_max", c.grid_max);
    detail::read_key(g, "shapes_min", c.shapes_min);
    detail::read_key(g, "shapes_max", c.shapes_max);
    detail::read_key(g, "dim_min", c.dim_min);
    detail::read_key(g, "dim_max", c.dim_max);
    detail::read_key(g, "canvas_px", c.canvas_px);
    detail::read_key(g, "cell_px_max", c.cell_px_max);
    detail::read_key(g, "canvas_cap_px", c.canvas_cap_px);
    detail::read_key(g, "px_per_unit", c.px_per_unit);
    detail::read_key(g, "min_px_per_unit", c.min_px_per_unit);
    detail::read_key(g, "px_shrink_step", c.px_shrink_step);
    detail::read_key(g, "attempts_per_level", c.attempts_per_level);
    detail::read_key(g, "label_margin_px", c.label_margin_px);
    detail::read_key(g, "retry_budget", c.retry_budget);
    detail::read_key(g, "grid_fill_percent", c.grid_fill_percent);
    detail::read_key(g, "require_unique_extremes", c.require_unique_extremes);
    detail::read_key(g, "allow_eval_only_train", c.allow_eval_only_train);
    if (g.contains("gr_mode")) {
      std::string m;
      detail::read_key(g, "gr_mode", m);
      if (m == "total") c.gr_mode = GrMode::Total;
      else if (m == "single") c.gr_mode = GrMode::Single;
      else throw ConfigError("gr_mode must be 'total' or 'single', got '" + m + "'");
    }
  }
  if (j.contains("render")) {
    const Json& r = j["render"];
    detail::reject_unknown(r, "render",
                           {"stroke_px", "font_px", "grid_line_px", "background", "stroke_color", "label_color",
                            "grid_color"});
    auto& c = base.render;
    detail::read_key(r, "stroke_px", c.stroke_px);
    detail::read_key(r, "font_px", c.font_px);
    detail::read_key(r, "grid_line_px", c.grid_line_px);
    detail::read_key(r, "background", c.background);
    detail::read_key(r, "stroke_color", c.stroke_color);
    detail::read_key(r, "label_color", c.label_color);
    detail::read_key(r, "grid_color", c.grid_color);
  }
  if (j.contains("reward")) apply_reward_json(j["reward"], base.reward);
  if (j.contains("grpo")) apply_grpo_json(j["grpo"], base.grpo);
  base.validate();
  return base;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  return config_from_json(j);
}

// Digest over the generation and render sections, which fully determine
// dataset bytes.
inline std::string config_digest(const Config& c) {
  const Json j = to_json(c);
  const std::string canon = Json{{"generation", j["generation"]}, {"render", j["render"]}}.dump();
  return to_hex(Fnv1a{}.add(canon).value());
}

}  // namespace compabench
