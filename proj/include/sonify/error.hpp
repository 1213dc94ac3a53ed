#pragma once

#include <stdexcept>
#include <string>

namespace sonify {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unsupported input file (WAV, SEMB, JSON Lines).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Arguments that violate an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Strict threshold comparison left no eligible candidate.
class DegenerateTieError : public Error {
 public:
  DegenerateTieError() : Error("degenerate tie at threshold") {}
};

/// Loudness gain requested for a signal with no gated block.
class SilenceError : public Error {
 public:
  SilenceError() : Error("cannot normalize silence") {}
};

}  // namespace sonify
