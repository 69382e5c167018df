#pragma once

#include <stdexcept>
#include <string>

namespace physhare {

/// Base for every error this library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// An input stream is inconsistent (for example a non-monotonic timestamp).
class CorruptInput : public Error {
 public:
  using Error::Error;
};

}  // namespace physhare
