#pragma once

#include <stdexcept>
#include <string>

namespace dyncore {

/// Caller supplied something outside an operation's precondition
/// (duplicate id, malformed weight, dimension mismatch, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A static constructor broke its declared size or weight bound, or a
/// structural invariant of a dynamic structure failed. Never recoverable.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Operation not offered by a structure (e.g. deletion in merge-and-reduce).
class UnsupportedOperation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dyncore
