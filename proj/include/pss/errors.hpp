#pragma once

#include <stdexcept>
#include <string>

namespace pss {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bracket expansion or bisection could not locate a root.
class NoRootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested level is at or above the supremum of the profile.
class EmptyLevelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A level-set function failed a structural requirement (monotonicity).
class InvalidLevelSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroVarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pss
