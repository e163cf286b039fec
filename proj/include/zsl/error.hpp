#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace zsl {

/// Broad failure category, used by the command-line tool to pick an exit code.
enum class ErrorKind {
  kShape,
  kInput,
  kConfig,
  kState,
  kFormat,
  kData,
  kDiverged,
  kIo,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::kShape, what) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::kInput, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error(ErrorKind::kState, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

// Malformed file contents; offset is the byte position where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(ErrorKind::kFormat, what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

// Well-formed file with invalid values (NaN entries, label out of range, ...).
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t row)
      : Error(ErrorKind::kData, what + " (row " + std::to_string(row) + ")"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class DivergedError : public Error {
 public:
  explicit DivergedError(int epoch)
      : Error(ErrorKind::kDiverged,
              "training diverged: non-finite loss in epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

// Wraps an error raised inside one stage of a protocol run, keeping its kind.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner)
      : Error(inner.kind(), "stage '" + stage + "': " + inner.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace zsl
