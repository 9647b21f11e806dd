#pragma once

#include <stdexcept>
#include <string>

namespace fibenv {

// Bad input wiring: mismatched spaces, malformed configs, unknown ids.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument values (nonpositive eps, out-of-range sizes).
class ArgumentError : public std::runtime_error {
 public:
  explicit ArgumentError(const std::string& what) : std::runtime_error(what) {}
};

// A stated hypothesis of an operation does not hold for the given inputs.
class HypothesisError : public std::runtime_error {
 public:
  explicit HypothesisError(const std::string& what) : std::runtime_error(what) {}
};

// The requested accuracy cannot be reached at the available resolution.
class ResolutionError : public std::runtime_error {
 public:
  explicit ResolutionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fibenv
