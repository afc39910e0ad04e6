#pragma once

#include <stdexcept>
#include <string>

namespace memexplore {

/// Base for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or message.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input parsed but violates a domain invariant (e.g. object on an occupied cell).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class UnreachableError : public Error {
 public:
  using Error::Error;
};

/// An agent (built-in or external) broke the step/tool-call protocol.
class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace memexplore
