#pragma once

#include <stdexcept>
#include <string>

namespace lpmc {

/// Caller passed arguments that cannot be interpreted (dimension mismatch,
/// empty grids, bad option strings).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument lies outside the mathematical domain of the operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A gradient reached or exceeded the light cone (|Du| >= 1).
class NotSpacelikeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Input file missing or unreadable.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lpmc
