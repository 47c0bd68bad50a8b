#ifndef PERCLOUD_ERRORS_HPP
#define PERCLOUD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace percloud {

// Base of every error thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (bad header, unparseable row).
class ParseError : public Error {
public:
  using Error::Error;
};

// Structurally well-formed data that violates a type invariant
// (NaN/Inf coordinates, ragged feature rows, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

// Filesystem-level failure (unreadable/unwritable path).
class IoError : public Error {
public:
  using Error::Error;
};

// Out-of-range or inconsistent operation parameters.
class BadParams : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class ShapeMismatch : public Error {
public:
  using Error::Error;
};

// Combined label/Hilbert key would not fit in 64 bits.
class LabelOverflow : public Error {
public:
  using Error::Error;
};

class QuerySetMismatch : public Error {
public:
  using Error::Error;
};

// Wraps a module error with the pipeline stage it occurred in.
class StagedError : public Error {
public:
  StagedError(std::string stage, const Error& cause, bool io)
      : Error("stage '" + stage + "': " + cause.what()),
        stage_(std::move(stage)),
        io_(io) {}

  const std::string& stage() const { return stage_; }
  bool is_io() const { return io_; }

private:
  std::string stage_;
  bool io_;
};

}  // namespace percloud

#endif
