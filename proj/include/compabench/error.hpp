#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace compabench {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or usage (maps to CLI exit status 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Sampler ran out of its retry budget; the config is over-constrained.
class GenerationExhausted : public Error {
 public:
  explicit GenerationExhausted(const std::string& what, std::size_t sample_index = npos)
      : Error(sample_index == npos ? what : what + " (sample " + std::to_string(sample_index) + ")"),
        sample_index_(sample_index) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t sample_index() const { return sample_index_; }

 private:
  std::size_t sample_index_;
};

// A scene without the uniqueness a task needs (tied nearest/farthest/largest).
class IllPosedScene : public Error {
 public:
  using Error::Error;
};

class ManifestCorrupt : public Error {
 public:
  static constexpr std::size_t kHeader = static_cast<std::size_t>(-1);

  // record_index is the 0-based position among records, or kHeader.
  ManifestCorrupt(const std::string& what, std::size_t record_index)
      : Error((record_index == kHeader ? std::string("header") : "record " + std::to_string(record_index)) + ": " +
              what),
        record_index_(record_index) {}
  std::size_t record_index() const { return record_index_; }

 private:
  std::size_t record_index_;
};

class AnswerMismatch : public Error {
 public:
  AnswerMismatch(const std::string& what, std::size_t record_index)
      : Error("record " + std::to_string(record_index) + ": " + what), record_index_(record_index) {}
  std::size_t record_index() const { return record_index_; }

 private:
  std::size_t record_index_;
};

class RasterizeFailure : public Error {
 public:
  using Error::Error;
};

class GroupSizeMismatch : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace compabench
