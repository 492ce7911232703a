#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace compabench {

// 64-bit FNV-1a; used for ids, seed derivation and config digests.
class Fnv1a {
 public:
  Fnv1a& add(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (v >> (8 * i)) & 0xFF;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

// SplitMix64 finalizer; spreads FNV output before seeding the engine.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Per-record seed: a pure function of (base seed, split name, record index).
// The task code is deliberately not mixed in so that paired PT/MM codes of one
// split share their underlying scenes.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view split, std::uint64_t index) {
  return mix64(Fnv1a{}.add(base).add(split).add(std::string_view("\0", 1)).add(index).value());
}

inline std::string to_hex(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return out;
}

// Deterministic sampler. The engine is std::mt19937_64 (bit-exact across
// standard libraries); bounded integers use rejection sampling instead of
// std::uniform_int_distribution, whose algorithm is implementation-defined.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  std::uint64_t next() {
    ++draws_;
    return engine_();
  }

  // Uniform in [lo, hi], inclusive.
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::int64_t>(next());
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span + 1) % span;
    std::uint64_t x;
    do x = next();
    while (x > limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  int uniform_int(int lo, int hi) { return static_cast<int>(uniform(lo, hi)); }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(n) - 1)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace compabench
