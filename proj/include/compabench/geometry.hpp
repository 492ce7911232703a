#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>

#include "compabench/error.hpp"

namespace compabench {

// Exact rational with a positive denominator, always in lowest terms.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(google-explicit-constructor)
  constexpr Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw std::domain_error("Rational: zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }
  constexpr bool is_integer() const { return den_ == 1; }

  friend constexpr Rational operator+(Rational a, Rational b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend constexpr Rational operator-(Rational a, Rational b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
  }
  friend constexpr Rational operator*(Rational a, Rational b) {
    return {a.num_ * b.num_, a.den_ * b.den_};
  }
  friend constexpr Rational operator/(Rational a, Rational b) {
    return {a.num_ * b.den_, a.den_ * b.num_};
  }
  friend constexpr bool operator==(Rational a, Rational b) = default;
  friend constexpr std::strong_ordering operator<=>(Rational a, Rational b) {
    return a.num_ * b.den_ <=> b.num_ * a.den_;
  }

  // Nearest integer, ties away from negative infinity.
  constexpr std::int64_t round_half_up() const {
    const std::int64_t twice = 2 * num_ + den_;
    const std::int64_t d = 2 * den_;
    return twice >= 0 ? twice / d : -((-twice + d - 1) / d);
  }

  // Terminating decimals print as decimals ("4.5"); anything else as "a/b".
  std::string to_string() const {
    if (den_ == 1) return std::to_string(num_);
    std::int64_t d = den_;
    int twos = 0, fives = 0;
    while (d % 2 == 0) d /= 2, ++twos;
    while (d % 5 == 0) d /= 5, ++fives;
    if (d != 1) return std::to_string(num_) + "/" + std::to_string(den_);
    const int digits = std::max(twos, fives);
    std::int64_t scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    const std::int64_t scaled = num_ * (scale / den_);
    const std::int64_t mag = scaled < 0 ? -scaled : scaled;
    std::string frac = std::to_string(mag % scale);
    frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
    return (scaled < 0 ? "-" : "") + std::to_string(mag / scale) + "." + frac;
  }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

enum class ShapeKind : std::uint8_t { Square, Rectangle, RightTriangle, Trapezoid };

inline constexpr std::array<ShapeKind, 4> kAllShapeKinds = {
    ShapeKind::Square, ShapeKind::Rectangle, ShapeKind::RightTriangle, ShapeKind::Trapezoid};

// Human-readable name used in questions and scene text ("right triangle").
constexpr std::string_view kind_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::Square: return "square";
    case ShapeKind::Rectangle: return "rectangle";
    case ShapeKind::RightTriangle: return "right triangle";
    case ShapeKind::Trapezoid: return "trapezoid";
  }
  return "?";
}

// Identifier used in serialized records ("right_triangle").
constexpr std::string_view kind_id(ShapeKind k) {
  switch (k) {
    case ShapeKind::Square: return "square";
    case ShapeKind::Rectangle: return "rectangle";
    case ShapeKind::RightTriangle: return "right_triangle";
    case ShapeKind::Trapezoid: return "trapezoid";
  }
  return "?";
}

inline std::optional<ShapeKind> kind_from_id(std::string_view id) {
  for (ShapeKind k : kAllShapeKinds)
    if (kind_id(k) == id) return k;
  return std::nullopt;
}

struct SquareDims {
  int side = 0;
  friend bool operator==(const SquareDims&, const SquareDims&) = default;
};
struct RectangleDims {
  int width = 0;
  int height = 0;
  friend bool operator==(const RectangleDims&, const RectangleDims&) = default;
};
struct RightTriangleDims {
  int leg_a = 0;  // horizontal leg
  int leg_b = 0;  // vertical leg
  friend bool operator==(const RightTriangleDims&, const RightTriangleDims&) = default;
};
struct TrapezoidDims {
  int base_a = 0;  // bottom base
  int base_b = 0;  // top base
  int height = 0;
  friend bool operator==(const TrapezoidDims&, const TrapezoidDims&) = default;
};

// Variant index order matches ShapeKind.
using Dimensions = std::variant<SquareDims, RectangleDims, RightTriangleDims, TrapezoidDims>;

struct Rgb {
  std::uint8_t r, g, b;
  friend constexpr bool operator==(Rgb, Rgb) = default;
};

struct PaletteEntry {
  std::string_view name;
  Rgb rgb;
};

inline constexpr std::array<PaletteEntry, 10> kPalette = {{
    {"red", {220, 38, 38}},
    {"blue", {37, 99, 235}},
    {"green", {22, 163, 74}},
    {"yellow", {234, 179, 8}},
    {"purple", {147, 51, 234}},
    {"orange", {249, 115, 22}},
    {"cyan", {6, 182, 212}},
    {"magenta", {217, 70, 239}},
    {"brown", {146, 64, 14}},
    {"pink", {244, 114, 182}},
}};

class Color {
 public:
  constexpr Color() = default;
  constexpr explicit Color(std::uint8_t palette_index) : index_(palette_index) {
    if (palette_index >= kPalette.size()) throw std::out_of_range("Color: palette index");
  }

  static std::optional<Color> from_name(std::string_view name) {
    for (std::size_t i = 0; i < kPalette.size(); ++i)
      if (kPalette[i].name == name) return Color(static_cast<std::uint8_t>(i));
    return std::nullopt;
  }

  constexpr std::uint8_t index() const { return index_; }
  constexpr std::string_view name() const { return kPalette[index_].name; }
  constexpr Rgb rgb() const { return kPalette[index_].rgb; }

  std::string hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    const Rgb c = rgb();
    std::string out = "#";
    for (std::uint8_t v : {c.r, c.g, c.b}) {
      out += digits[v >> 4];
      out += digits[v & 0xF];
    }
    return out;
  }

  friend constexpr bool operator==(Color, Color) = default;

 private:
  std::uint8_t index_ = 0;
};

class Shape {
 public:
  // Validates the dimension schema; throws std::invalid_argument.
  Shape(Dimensions dims, Color color) : dims_(dims), color_(color) { validate(dims_); }

  ShapeKind kind() const { return static_cast<ShapeKind>(dims_.index()); }
  const Dimensions& dims() const { return dims_; }
  Color color() const { return color_; }

  // Axis-aligned extent in abstract units (width, height) as drawn.
  std::pair<int, int> extent() const {
    return std::visit(
        [](const auto& d) -> std::pair<int, int> {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, SquareDims>) return {d.side, d.side};
          else if constexpr (std::is_same_v<T, RectangleDims>) return {d.width, d.height};
          else if constexpr (std::is_same_v<T, RightTriangleDims>) return {d.leg_a, d.leg_b};
          else return {std::max(d.base_a, d.base_b), d.height};
        },
        dims_);
  }

  // Smallest and largest length in the dimension schema.
  std::pair<int, int> length_range() const {
    return std::visit(
        [](const auto& d) -> std::pair<int, int> {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, SquareDims>) return {d.side, d.side};
          else if constexpr (std::is_same_v<T, RectangleDims>)
            return {std::min(d.width, d.height), std::max(d.width, d.height)};
          else if constexpr (std::is_same_v<T, RightTriangleDims>)
            return {std::min(d.leg_a, d.leg_b), std::max(d.leg_a, d.leg_b)};
          else
            return {std::min({d.base_a, d.base_b, d.height}), std::max({d.base_a, d.base_b, d.height})};
        },
        dims_);
  }

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  static void validate(const Dimensions& dims) {
    auto positive = [](int v) {
      if (v <= 0) throw std::invalid_argument("Shape: lengths must be positive");
    };
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, SquareDims>) {
            positive(d.side);
          } else if constexpr (std::is_same_v<T, RectangleDims>) {
            positive(d.width);
            positive(d.height);
            if (d.width == d.height) throw std::invalid_argument("Shape: rectangle with equal sides");
          } else if constexpr (std::is_same_v<T, RightTriangleDims>) {
            positive(d.leg_a);
            positive(d.leg_b);
          } else {
            positive(d.base_a);
            positive(d.base_b);
            positive(d.height);
            if (d.base_a == d.base_b) throw std::invalid_argument("Shape: trapezoid with equal bases");
          }
        },
        dims);
  }

  Dimensions dims_;
  Color color_;
};

inline Rational area(const Shape& shape) {
  return std::visit(
      [](const auto& d) -> Rational {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, SquareDims>) return Rational(d.side) * d.side;
        else if constexpr (std::is_same_v<T, RectangleDims>) return Rational(d.width) * d.height;
        else if constexpr (std::is_same_v<T, RightTriangleDims>) return Rational(d.leg_a * d.leg_b, 2);
        else return Rational((d.base_a + d.base_b) * d.height, 2);
      },
      shape.dims());
}

inline std::int64_t rounded_area(const Shape& shape) { return area(shape).round_half_up(); }

// LaTeX-style derivation, e.g. "\frac{(3 + 5)}{2} \times 4 = 16". Half-integral
// areas append the rounding step: "\frac{3 \times 3}{2} = 4.5 \approx 5".
inline std::string area_formula_latex(const Shape& shape) {
  const std::string lhs = std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        using std::to_string;
        if constexpr (std::is_same_v<T, SquareDims>)
          return to_string(d.side) + " \\times " + to_string(d.side);
        else if constexpr (std::is_same_v<T, RectangleDims>)
          return to_string(d.width) + " \\times " + to_string(d.height);
        else if constexpr (std::is_same_v<T, RightTriangleDims>)
          return "\\frac{" + to_string(d.leg_a) + " \\times " + to_string(d.leg_b) + "}{2}";
        else
          return "\\frac{(" + to_string(d.base_a) + " + " + to_string(d.base_b) + ")}{2} \\times " +
                 to_string(d.height);
      },
      shape.dims());
  const Rational a = area(shape);
  std::string out = lhs + " = " + a.to_string();
  if (!a.is_integer()) out += " \\approx " + std::to_string(a.round_half_up());
  return out;
}

}  // namespace compabench
