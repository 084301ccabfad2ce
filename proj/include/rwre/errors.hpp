#pragma once

#include <stdexcept>
#include <string>

namespace rwre {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
  using Error::Error;
};

/// Invalid numeric parameter (nonpositive weight, r <= 1, ...).
class ParameterError : public Error {
  using Error::Error;
};

/// A caller broke a precondition (start outside region, point inside a box
/// passed to exit classification, ...).
class ContractError : public Error {
  using Error::Error;
};

class NumericError : public Error {
  using Error::Error;
};

class GeometryError : public Error {
  using Error::Error;
};

/// Not enough uncensored data to produce an estimate.
class InsufficientDataError : public Error {
 public:
  InsufficientDataError(const std::string& what, long censored)
      : Error(what), censored_(censored) {}
  long censored() const { return censored_; }

 private:
  long censored_ = 0;
};

class ConfigError : public Error {
  using Error::Error;
};

}  // namespace rwre
