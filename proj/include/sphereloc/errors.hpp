#pragma once

#include <stdexcept>
#include <string>

namespace sphereloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a type invariant (non-finite samples, empty batch, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Band limits, channel counts or vector dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but carries no usable signal (zero vector, constant image).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or weight file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed file on disk.  `field()` names the offending key when known.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::string field = {})
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Requested view footprint does not touch the raster.
class OutOfBounds : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition (e.g. unnormalized particle set).
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace sphereloc
