#pragma once

#include <stdexcept>
#include <string>

namespace phsar {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied value violates a precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read, written, or is truncated.
class IoError : public Error {
 public:
  using Error::Error;
};

// A file was readable but its contents are not a supported format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Training produced nothing usable (e.g. zero training pairs).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace phsar
