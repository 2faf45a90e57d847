#pragma once

#include <stdexcept>
#include <string>

namespace steinpi {

// Base class for every error raised by the library. The CLI maps
// ConfigError to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidSimplex : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class NoExactSampler : public Error {
 public:
  using Error::Error;
};

class NegativeQuadraticForm : public Error {
 public:
  using Error::Error;
};

class GramTooLarge : public Error {
 public:
  using Error::Error;
};

class SizeGuard : public Error {
 public:
  using Error::Error;
};

class InsufficientReplicates : public Error {
 public:
  using Error::Error;
};

class EmptySummary : public Error {
 public:
  using Error::Error;
};

}  // namespace steinpi
