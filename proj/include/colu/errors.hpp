#pragma once

#include <stdexcept>
#include <string>

namespace colu {

// Non-finite input to a numerical routine.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Argument outside its documented range (h <= 0, n < 2, dropout rate >= 1, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation called in the wrong state, e.g. backward before forward.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or truncated dataset / parameter file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent training configuration, detected before any work is done.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace colu
