#pragma once

#include <stdexcept>
#include <string>

namespace stein {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSubsetError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration would exceed the configured state budget.
class EnumerationLimitError : public Error {
 public:
  using Error::Error;
};

// sigma^2 <= 0: the statistic carries no fluctuation to normalize.
class DegenerateStatisticError : public Error {
 public:
  using Error::Error;
};

class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

class SolverAccuracyError : public Error {
 public:
  SolverAccuracyError(const std::string& what, double achieved)
      : Error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class InvalidCoordinateError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Two pairwise distances compare equal, so nearest-neighbor ranks are undefined.
class TieError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class MomentOrderError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace stein
