#pragma once

#include <stdexcept>
#include <string>

namespace qnorm {

// Invalid configuration or argument: bad ranges, unknown keys, missing fields.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Qubit or observable index outside the register.
class GateError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Request exceeds a representational limit (e.g. dense product tables).
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A runtime invariant was violated (degenerate state, inconsistent log).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Output could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

}  // namespace detail

}  // namespace qnorm
