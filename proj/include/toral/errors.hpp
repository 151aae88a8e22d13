#pragma once

#include <stdexcept>
#include <string>

namespace toral {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or non-finite input (bad matrix string, NaN coordinates, bad config).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but violates an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NotAnAutomorphism : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class Unsupported : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// W + E^s fills the whole space, so the foliation has a single leaf.
class DegenerateFoliation : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class OutOfRange : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class EmptyHistogram : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

}  // namespace toral
