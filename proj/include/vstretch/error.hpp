#pragma once

#include <stdexcept>
#include <string>

namespace vstretch {

/// Base of every error raised by the library. `kind()` is a short stable tag
/// used in machine-readable error records.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what) : Error("geometry", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

}  // namespace vstretch
