#pragma once

#include <stdexcept>
#include <string>

namespace bitree {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Instance too large for the requested mode (dense cap, enumeration cap).
class SizeError : public Error {
 public:
  using Error::Error;
};

/// An operation's documented precondition does not hold for its input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A weight does not carry the structure tag an operation requires.
class TagError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario / rectangle / JSON input.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver did not reach its stopping criterion.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A checked mathematical contract (inequality, identity) failed at runtime.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace bitree
