#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "compabench/geometry.hpp"
#include "compabench/task.hpp"

namespace compabench {

// rl_ground mode additionally requires the caption block to lead.
enum class ParseMode : std::uint8_t { Standard, RlGround };

constexpr ParseMode parse_mode_for(RewardMode m) { return caption_active(m) ? ParseMode::RlGround : ParseMode::Standard; }

struct FormatFlags {
  bool has_think = false;
  bool has_answer = false;
  bool has_caption = false;
  bool blocks_in_order = false;
  bool no_stray_text = false;
  friend bool operator==(const FormatFlags&, const FormatFlags&) = default;
};

struct ParsedCompletion {
  std::optional<std::string> caption;
  std::optional<std::string> think;
  std::optional<std::string> answer_raw;
  std::optional<Answer> answer;
  FormatFlags format_flags;
};

// Tokenization rules shared by answer extraction and progress matching:
//  * a numeric literal is a maximal digit run, optionally followed by '.' and
//    another digit run ("4.5"); a trailing '.' is not part of the literal;
//  * literals with more than 15 digits are ignored;
//  * extract_numbers() ignores signs, so "|1 - 3|" yields {1, 3}.
namespace detail {

struct NumericToken {
  std::size_t begin = 0, end = 0;
  Rational value;
  bool integral = true;
};

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline std::vector<NumericToken> numeric_tokens(std::string_view text) {
  std::vector<NumericToken> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    std::int64_t whole = 0, frac = 0, scale = 1;
    int digits = 0;
    bool overflow = false;
    for (; i < text.size() && is_digit(text[i]); ++i) {
      if (++digits > 15) overflow = true;
      else whole = whole * 10 + (text[i] - '0');
    }
    bool has_frac = false;
    if (i + 1 < text.size() && text[i] == '.' && is_digit(text[i + 1])) {
      has_frac = true;
      for (++i; i < text.size() && is_digit(text[i]); ++i) {
        if (++digits > 15) overflow = true;
        else {
          frac = frac * 10 + (text[i] - '0');
          scale *= 10;
        }
      }
    }
    if (overflow) continue;
    NumericToken t;
    t.begin = begin;
    t.end = i;
    t.value = has_frac ? Rational(whole * scale + frac, scale) : Rational(whole);
    t.integral = t.value.is_integer();
    out.push_back(t);
  }
  return out;
}

struct Block {
  std::size_t open = 0;   // position of "<tag>"
  std::size_t close = 0;  // one past "</tag>"
  std::string_view content;
};

// First "<tag>" paired with the first "</tag>" after it; unclosed means absent.
inline std::optional<Block> find_block(std::string_view text, std::string_view tag, int& occurrences) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  occurrences = 0;
  for (std::size_t p = text.find(open); p != std::string_view::npos; p = text.find(open, p + 1)) ++occurrences;
  const std::size_t o = text.find(open);
  if (o == std::string_view::npos) return std::nullopt;
  const std::size_t c = text.find(close, o + open.size());
  if (c == std::string_view::npos) return std::nullopt;
  return Block{o, c + close.size(), text.substr(o + open.size(), c - o - open.size())};
}

inline std::optional<std::int64_t> signed_literal_value(std::string_view text, const NumericToken& t) {
  if (!t.integral) return std::nullopt;
  const bool negative = t.begin > 0 && text[t.begin - 1] == '-' && (t.begin < 2 || !is_digit(text[t.begin - 2]));
  return negative ? -t.value.num() : t.value.num();
}

inline std::optional<std::int64_t> last_integer(std::string_view text) {
  const auto tokens = numeric_tokens(text);
  if (tokens.empty()) return std::nullopt;
  return signed_literal_value(text, tokens.back());
}

// Last "(int, int)" with arbitrary whitespace around the numbers.
inline std::optional<Cell> last_cell(std::string_view text) {
  std::optional<Cell> found;
  auto skip_ws = [&](std::size_t& i) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  auto read_int = [&](std::size_t& i) -> std::optional<int> {
    bool neg = false;
    if (i < text.size() && text[i] == '-') {
      neg = true;
      ++i;
    }
    const std::size_t start = i;
    std::int64_t v = 0;
    while (i < text.size() && is_digit(text[i])) {
      if (i - start >= 9) return std::nullopt;
      v = v * 10 + (text[i++] - '0');
    }
    if (i == start) return std::nullopt;
    return static_cast<int>(neg ? -v : v);
  };
  for (std::size_t p = text.find('('); p != std::string_view::npos; p = text.find('(', p + 1)) {
    std::size_t i = p + 1;
    skip_ws(i);
    auto r = read_int(i);
    if (!r) continue;
    skip_ws(i);
    if (i >= text.size() || text[i] != ',') continue;
    ++i;
    skip_ws(i);
    auto c = read_int(i);
    if (!c) continue;
    skip_ws(i);
    if (i >= text.size() || text[i] != ')') continue;
    found = Cell{*r, *c};
  }
  return found;
}

}  // namespace detail

// All unsigned numeric literals in `text`, as a sorted multiset.
inline std::vector<Rational> extract_numbers(std::string_view text) {
  std::vector<Rational> out;
  for (const auto& t : detail::numeric_tokens(text)) out.push_back(t.value);
  std::sort(out.begin(), out.end());
  return out;
}

// Never throws for any input text.
inline ParsedCompletion parse(std::string_view completion, AnswerKind expected, ParseMode mode) {
  ParsedCompletion out;
  int n_caption = 0, n_think = 0, n_answer = 0;
  const auto caption = detail::find_block(completion, "caption", n_caption);
  const auto think = detail::find_block(completion, "think", n_think);
  const auto answer = detail::find_block(completion, "answer", n_answer);

  auto& f = out.format_flags;
  f.has_caption = caption.has_value();
  f.has_think = think.has_value();
  f.has_answer = answer.has_value();
  if (caption) out.caption = std::string(caption->content);
  if (think) out.think = std::string(think->content);
  if (answer) out.answer_raw = std::string(answer->content);

  f.blocks_in_order = think && answer && think->close <= answer->open;
  if (mode == ParseMode::RlGround) f.blocks_in_order = f.blocks_in_order && caption && caption->close <= think->open;

  // Only whitespace may remain once the matched blocks are removed; blocks
  // must not overlap and no tag may open twice.
  std::vector<detail::Block> blocks;
  for (const auto* b : {&caption, &think, &answer})
    if (*b) blocks.push_back(**b);
  std::sort(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) { return a.open < b.open; });
  bool clean = n_caption <= 1 && n_think <= 1 && n_answer <= 1;
  std::size_t pos = 0;
  for (const auto& b : blocks) {
    if (b.open < pos) {
      clean = false;
      break;
    }
    for (std::size_t i = pos; i < b.open && clean; ++i)
      clean = std::isspace(static_cast<unsigned char>(completion[i])) != 0;
    pos = b.close;
  }
  for (std::size_t i = pos; i < completion.size() && clean; ++i)
    clean = std::isspace(static_cast<unsigned char>(completion[i])) != 0;
  f.no_stray_text = clean && !blocks.empty();

  if (out.answer_raw) {
    if (expected == AnswerKind::Integer) {
      if (auto v = detail::last_integer(*out.answer_raw)) out.answer = IntegerArea{*v};
    } else if (auto c = detail::last_cell(*out.answer_raw)) {
      out.answer = *c;
    }
  }
  return out;
}

}  // namespace compabench
