#pragma once

#include <stdexcept>
#include <string>

namespace skinseg {

/// Error categories. The numeric value doubles as the CLI exit code.
enum class ErrorCode : int {
  io = 1,
  degenerate_volume = 2,
  config = 3,
  empty_mesh = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// File access failures and malformed file contents.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

/// Malformed file contents; carries the line (text formats) or byte offset.
class ParseError : public IoError {
 public:
  using IoError::IoError;
};

/// A volume whose intensity range collapses to a single value.
class DegenerateVolumeError : public Error {
 public:
  explicit DegenerateVolumeError(const std::string& what)
      : Error(ErrorCode::degenerate_volume, what) {}
};

/// Invalid parameters, specs or manifests.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::config, what) {}
};

/// No slice corner lies below the isovalue.
class NoSeedError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A point set (mesh vertex list) with no elements where one is required.
class EmptyPointSetError : public Error {
 public:
  explicit EmptyPointSetError(const std::string& what) : Error(ErrorCode::empty_mesh, what) {}
};

}  // namespace skinseg
