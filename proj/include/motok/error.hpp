#pragma once

#include <stdexcept>
#include <string>

namespace motok {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument (shape, range, representation flag) was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or does not match its declared format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The scene has no admissible free region; the motion should be treated as scene-less.
class SceneLessError : public Error {
 public:
  using Error::Error;
};

}  // namespace motok
