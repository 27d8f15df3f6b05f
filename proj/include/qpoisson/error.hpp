#pragma once

#include <stdexcept>
#include <string>

namespace qpoisson {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: malformed problem, out-of-domain argument, bad config.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point encoding failure (overflow or eigenvalue collision).
class EncodingError : public Error {
 public:
  using Error::Error;
};

/// A qubit or memory budget was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Execution produced no usable result (e.g. nothing survived post-selection).
class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace qpoisson
