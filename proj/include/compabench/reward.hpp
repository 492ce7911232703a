#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compabench/config.hpp"
#include "compabench/error.hpp"
#include "compabench/parser.hpp"
#include "compabench/task.hpp"

namespace compabench {

struct RewardBreakdown {
  double accuracy = 0;  // {0, 1}
  double format = 0;    // fraction of required format flags
  double caption = 0;   // {0, 1}
  double progress = 0;  // hit subgoals / all subgoals
  std::vector<bool> subgoal_hits;
  double total = 0;
  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

namespace detail {

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_word_char(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// `word` occurs in `text` with no letter immediately before or after it.
inline bool contains_word(std::string_view text, std::string_view word) {
  for (std::size_t p = text.find(word); p != std::string_view::npos; p = text.find(word, p + 1)) {
    const bool left = p == 0 || !is_word_char(text[p - 1]);
    const bool right = p + word.size() >= text.size() || !is_word_char(text[p + word.size()]);
    if (left && right) return true;
  }
  return false;
}

// Sentences end at newlines, ';', '!', '?', and at '.' followed by whitespace
// or end of text (so "4.5" stays intact).
inline std::vector<std::string_view> sentences(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const bool end = i == text.size() || text[i] == '\n' || text[i] == ';' || text[i] == '!' || text[i] == '?' ||
                     (text[i] == '.' && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))));
    if (end) {
      if (i > start) out.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::vector<Color> scene_colors(const Scene& scene) {
  std::vector<Color> out;
  if (const auto* f = std::get_if<FreeScene>(&scene))
    for (const auto& p : f->shapes) out.push_back(p.shape.color());
  else
    for (const auto& p : std::get<GridScene>(scene).placements) out.push_back(p.shape.color());
  return out;
}

inline std::optional<Color> target_color(const Scene& scene) {
  if (const auto* g = std::get_if<GridScene>(&scene)) return g->target().shape.color();
  return std::nullopt;
}

// ExtremeShape matcher: some sentence of the (lowercased) think text contains
// a nearest/closest (or farthest/furthest) keyword and the expected color, and
// names no other scene color except the target's.
inline bool extreme_hit(std::string_view think_lower, const SubgoalFact& goal, const Scene& scene) {
  const std::array<std::string_view, 2> keys = goal.which == Extreme::Nearest
                                                   ? std::array<std::string_view, 2>{"nearest", "closest"}
                                                   : std::array<std::string_view, 2>{"farthest", "furthest"};
  const auto colors = scene_colors(scene);
  const auto target = target_color(scene);
  for (std::string_view s : sentences(think_lower)) {
    if (!contains_word(s, keys[0]) && !contains_word(s, keys[1])) continue;
    if (!contains_word(s, goal.color.name())) continue;
    const bool others = std::any_of(colors.begin(), colors.end(), [&](Color c) {
      return c != goal.color && c != target && contains_word(s, c.name());
    });
    if (!others) return true;
  }
  return false;
}

inline bool caption_covers_scene(std::string_view caption, const Scene& scene) {
  const std::string lower = lowercase(caption);
  const auto colors = scene_colors(scene);
  return std::all_of(colors.begin(), colors.end(), [&](Color c) { return contains_word(lower, c.name()); });
}

}  // namespace detail

// `parsed` should come from parse(..., parse_mode_for(cfg.mode)).
inline RewardBreakdown score(const ParsedCompletion& parsed, const TaskInstance& instance, const RewardConfig& cfg) {
  RewardBreakdown r;
  r.accuracy = (parsed.answer && *parsed.answer == instance.answer) ? 1.0 : 0.0;

  const FormatFlags& f = parsed.format_flags;
  std::vector<bool> required = {f.has_think, f.has_answer, f.blocks_in_order, f.no_stray_text};
  if (caption_active(cfg.mode)) required.push_back(f.has_caption);
  r.format = static_cast<double>(std::count(required.begin(), required.end(), true)) /
             static_cast<double>(required.size());

  r.caption = (parsed.caption && detail::caption_covers_scene(*parsed.caption, instance.scene)) ? 1.0 : 0.0;

  const auto& goals = instance.trace.subgoals;
  r.subgoal_hits.assign(goals.size(), false);
  if (parsed.think) {
    const auto numbers = extract_numbers(*parsed.think);
    const std::size_t cap = static_cast<std::size_t>(cfg.progress_token_cap_factor) *
                            extract_numbers(render_scene_text(instance.scene)).size();
    if (numbers.size() <= cap) {
      const std::string lower = detail::lowercase(*parsed.think);
      for (std::size_t i = 0; i < goals.size(); ++i) {
        const auto& g = goals[i];
        if (g.kind == SubgoalKind::ExtremeShape)
          r.subgoal_hits[i] = detail::extreme_hit(lower, g, instance.scene);
        else
          r.subgoal_hits[i] = std::binary_search(numbers.begin(), numbers.end(), Rational(g.value));
      }
    }
  }
  if (!goals.empty())
    r.progress = static_cast<double>(std::count(r.subgoal_hits.begin(), r.subgoal_hits.end(), true)) /
                 static_cast<double>(goals.size());

  r.total = cfg.w_accuracy * r.accuracy + cfg.w_format * r.format;
  if (caption_active(cfg.mode)) r.total += cfg.w_caption * r.caption;
  if (progress_active(cfg.mode)) r.total += cfg.w_progress_total * r.progress;
  return r;
}

inline RewardBreakdown score_completion(std::string_view completion, const TaskInstance& instance,
                                        const RewardConfig& cfg) {
  return score(parse(completion, answer_kind(instance.code), parse_mode_for(cfg.mode)), instance, cfg);
}

// a_i = (r_i - mean) / max(popstd, epsilon_std); exact zeros when all rewards
// are equal.
inline std::vector<double> group_advantages(std::span<const double> rewards, const GrpoConfig& cfg) {
  if (rewards.size() != static_cast<std::size_t>(cfg.group_size))
    throw GroupSizeMismatch("expected a group of " + std::to_string(cfg.group_size) + " rewards, got " +
                            std::to_string(rewards.size()));
  std::vector<double> adv(rewards.size(), 0.0);
  if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards.front(); })) return adv;
  const double n = static_cast<double>(rewards.size());
  double mean = 0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  const double denom = std::max(sd, cfg.epsilon_std);
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / denom;
  return adv;
}

// beta * mean(exp(d) - d - 1), d = logp_ref - logp_policy per token.
inline double kl_penalty(std::span<const double> logp_policy, std::span<const double> logp_ref, const GrpoConfig& cfg) {
  if (logp_policy.size() != logp_ref.size())
    throw LengthMismatch("kl_penalty: " + std::to_string(logp_policy.size()) + " policy vs " +
                         std::to_string(logp_ref.size()) + " reference log-probs");
  if (cfg.beta == 0.0 || logp_policy.empty()) return 0.0;
  double acc = 0;
  for (std::size_t i = 0; i < logp_policy.size(); ++i) {
    const double d = logp_ref[i] - logp_policy[i];
    acc += std::expm1(d) - d;
  }
  return cfg.beta * acc / static_cast<double>(logp_policy.size());
}

}  // namespace compabench
