#ifndef HCDESIGN_ERROR_HPP
#define HCDESIGN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hcdesign {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes: configuration/input problems -> 2, numeric failures -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: non-permutations, bad vertices, NaN observations.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A request whose combinatorial size exceeds a hard guard.
class SizeLimit : public Error {
 public:
  using Error::Error;
};

// Vector or matrix lengths that do not agree with the vertex count.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Unknown algorithm ids, bad fold counts, unreadable config files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Factorization failures and singular systems.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace hcdesign

#endif  // HCDESIGN_ERROR_HPP
